#pragma once
#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "charex/errors.hpp"
#include "charex/parallel.hpp"

namespace charex {

// Counter-based stream (Philox 4x32-10).  A draw is a pure function of
// (seed, stream_id, counter), so distinct substreams can be consumed on
// different threads with no shared state, and replaying a stream is exact.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  // Independent child stream for work item i (one level of fan-out per
  // parallel region; children are themselves splittable).
  RngStream substream(std::uint64_t i) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64();
  double uniform01();                    // [0, 1)
  double normal();                       // N(0, 1)
  std::complex<double> complex_normal(); // E|z|^2 = 1 (re, im ~ N(0, 1/2))

private:
  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int buf_pos_ = 2;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct MCEstimate {
  double mean = 0.0;
  double std_err = 0.0;   // sample sd / sqrt(n); 0 when n < 2
  std::uint64_t n = 0;
};

// Deterministic mean/stderr via fixed-order pairwise reduction.
MCEstimate mc_reduce(const std::vector<double>& values);

// Haar-distributed unitary: complex Ginibre + QR, with the R-diagonal phase
// fix.  Postcondition max|U*U - I| <= 1e-12 (checked).
Eigen::MatrixXcd haar_sample(int N, RngStream stream);

// GUE with density prop. to exp(-(N/2) tr M^2): diagonal variance 1/N,
// off-diagonal real/imag variance 1/(2N); E tr M^2 = N.
Eigen::MatrixXcd gue_sample(int N, RngStream stream);

// Ascending eigenvalues of a Hermitian matrix.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& M);

}  // namespace charex
