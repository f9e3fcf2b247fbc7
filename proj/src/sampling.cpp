#include "charex/sampling.hpp"

#include <cmath>

namespace charex {

namespace {

// Philox 4x32-10 (Salmon et al.), the standard counter-based generator.
struct Philox4x32 {
  static constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  static constexpr std::uint32_t B0 = 0x9E3779B9u, B1 = 0xBB67AE85u;

  static void round(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t out[4];
    out[0] = hi1 ^ c[1] ^ k[0];
    out[1] = lo1;
    out[2] = hi0 ^ c[3] ^ k[1];
    out[3] = lo0;
    c[0] = out[0]; c[1] = out[1]; c[2] = out[2]; c[3] = out[3];
  }

  static void block(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                    std::uint64_t out[2]) {
    std::uint32_t c[4] = {static_cast<std::uint32_t>(counter),
                          static_cast<std::uint32_t>(counter >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t k[2] = {static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) {
      round(c, k);
      k[0] += B0;
      k[1] += B1;
    }
    out[0] = (static_cast<std::uint64_t>(c[1]) << 32) | c[0];
    out[1] = (static_cast<std::uint64_t>(c[3]) << 32) | c[2];
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::substream(std::uint64_t i) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(i + 0x6A09E667F3BCC909ull)));
}

std::uint64_t RngStream::next_u64() {
  if (buf_pos_ >= 2) {
    Philox4x32::block(seed_, stream_, counter_++, buf_);
    buf_pos_ = 0;
  }
  return buf_[buf_pos_++];
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u in (0, 1] avoids log(0).
  double u = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double v = uniform01();
  double r = std::sqrt(-2.0 * std::log(u));
  double a = 6.283185307179586476925286766559 * v;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::complex<double> RngStream::complex_normal() {
  const double inv_sqrt2 = 0.70710678118654752440084436210485;
  double re = normal(), im = normal();
  return {re * inv_sqrt2, im * inv_sqrt2};
}

MCEstimate mc_reduce(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInput("mc_reduce on empty sample buffer");
  MCEstimate e;
  e.n = values.size();
  e.mean = par::pairwise_sum(values) / static_cast<double>(e.n);
  if (e.n >= 2) {
    std::vector<double> dev2(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      double d = values[i] - e.mean;
      dev2[i] = d * d;
    }
    double var = par::pairwise_sum(dev2) / static_cast<double>(e.n - 1);
    e.std_err = std::sqrt(var / static_cast<double>(e.n));
  }
  return e;
}

Eigen::MatrixXcd haar_sample(int N, RngStream stream) {
  if (N <= 0) throw EmptyInput("haar_sample needs N >= 1");
  Eigen::MatrixXcd G(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) G(i, j) = stream.complex_normal();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
  Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
  Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < N; ++j) {
    std::complex<double> r = R(j, j);
    double a = std::abs(r);
    std::complex<double> phase = (a > 0.0) ? r / a : std::complex<double>(1.0, 0.0);
    Q.col(j) *= phase;
  }
  double dev = (Q.adjoint() * Q - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
  if (dev > 1e-12)
    throw BoundViolation("haar_sample unitarity deviation " + std::to_string(dev));
  return Q;
}

Eigen::MatrixXcd gue_sample(int N, RngStream stream) {
  if (N <= 0) throw EmptyInput("gue_sample needs N >= 1");
  const double diag_sd = 1.0 / std::sqrt(static_cast<double>(N));
  const double off_sd = 1.0 / std::sqrt(2.0 * static_cast<double>(N));
  Eigen::MatrixXcd M(N, N);
  for (int i = 0; i < N; ++i) {
    M(i, i) = diag_sd * stream.normal();
    for (int j = i + 1; j < N; ++j) {
      std::complex<double> z(off_sd * stream.normal(), off_sd * stream.normal());
      M(i, j) = z;
      M(j, i) = std::conj(z);
    }
  }
  return M;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace charex
