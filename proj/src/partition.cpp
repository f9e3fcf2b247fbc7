#include "charex/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "charex/parallel.hpp"

namespace charex {

namespace {

// Streaming (mean, M2, n) statistics combined across blocks in a fixed
// order (Chan's update).  Deterministic, and exactly zero-variance inputs
// keep m2 == 0 (no sum-of-squares cancellation).
struct MeanM2 {
  double mean = 0.0, m2 = 0.0;
  std::uint64_t n = 0;
};

MeanM2 combine(const MeanM2& a, const MeanM2& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  MeanM2 out;
  out.n = a.n + b.n;
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * nb / (na + nb);
  out.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
  return out;
}

// Two-pass block statistics over a contiguous buffer (pairwise sums).
MeanM2 block_stats(const std::vector<double>& v) {
  MeanM2 s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = par::pairwise_sum(v) / static_cast<double>(v.size());
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - s.mean;
    dev[i] = d * d;
  }
  s.m2 = par::pairwise_sum(dev);
  return s;
}

double std_err_of(const MeanM2& s) {
  if (s.n < 2) return 0.0;
  const double n = static_cast<double>(s.n);
  const double var = s.m2 / (n - 1.0);
  return std::sqrt(std::max(0.0, var) / n);
}

// Eigenvalues of A^{1/2} Phi(M) A^{1/2} (ascending).
std::vector<double> capped_product_eigenvalues(const ModelSpec& spec, const Eigen::MatrixXcd& M) {
  const int n = spec.N();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  Eigen::VectorXd phi_of_m(n);
  for (int i = 0; i < n; ++i) phi_of_m(i) = spec.phi.eval(es.eigenvalues()(i));
  const Eigen::MatrixXcd& U = es.eigenvectors();
  Eigen::MatrixXcd P = U * phi_of_m.asDiagonal() * U.adjoint();
  Eigen::VectorXd sqrt_a(n);
  for (int i = 0; i < n; ++i) sqrt_a(i) = std::sqrt(spec.A.values()[i]);
  Eigen::MatrixXcd K = sqrt_a.asDiagonal() * P * sqrt_a.asDiagonal();
  return hermitian_eigenvalues(K);
}

}  // namespace

ModelSpec::ModelSpec(SpectrumSet a, SpectrumSet b, CutoffFunction f)
    : A(std::move(a)), B(std::move(b)), phi(std::move(f)) {
  if (A.size() != B.size())
    throw UsageError("model spectra must have equal sizes; got " + std::to_string(A.size()) +
                     " and " + std::to_string(B.size()));
}

HypothesisReport validate_hypotheses(const ModelSpec& spec) {
  if (!spec.A.nonnegative())
    throw HypothesisViolation("nonnegativity: A has eigenvalue " + std::to_string(spec.A.min()) +
                              " < 0");
  if (!spec.B.nonnegative())
    throw HypothesisViolation("nonnegativity: B has eigenvalue " + std::to_string(spec.B.min()) +
                              " < 0");
  HypothesisReport rep;
  rep.norm_a = spec.A.sup_abs();
  rep.norm_b = spec.B.sup_abs();
  if (rep.norm_a > 1.0)
    throw HypothesisViolation("norm bound: ||A|| = " + std::to_string(rep.norm_a) + " > 1");
  if (rep.norm_b > 1.0)
    throw HypothesisViolation("norm bound: ||B|| = " + std::to_string(rep.norm_b) + " > 1");
  // The cutoff family certifies 0 < inf <= Phi <= sup < 1 at construction;
  // re-derive the gap that keeps the expansion convergent.
  rep.phi_inf = spec.phi.inf();
  rep.phi_sup = spec.phi.norm();
  rep.rho_phi = spec.phi.rho();
  rep.spectral_gap = 1.0 - rep.phi_sup * rep.norm_a * rep.norm_b;
  if (!(rep.spectral_gap > 0.0))
    throw HypothesisViolation("spectral gap: ||Phi|| ||A|| ||B|| >= 1");
  return rep;
}

double integrand_log(const ModelSpec& spec, const Eigen::MatrixXcd& M) {
  const int n = spec.N();
  if (M.rows() != n || M.cols() != n)
    throw UsageError("matrix dimension " + std::to_string(M.rows()) + " does not match N = " +
                     std::to_string(n));
  const std::vector<double> mu = capped_product_eigenvalues(spec, M);
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    const double b = spec.B.values()[i];
    for (int j = 0; j < n; ++j) {
      const double t = b * mu[j];
      if (t >= 1.0)
        throw SpectralGapLost("1 - b_i mu_j = " + std::to_string(1.0 - t) +
                              " <= 0 under a validated spec");
      out -= std::log1p(-t);
    }
  }
  return out;
}

MCEstimate partition_mc_ratio(const ModelSpec& spec, std::uint64_t samples, RngStream stream) {
  validate_hypotheses(spec);
  if (samples == 0) throw UsageError("samples must be positive");
  std::vector<double> vals(samples);
  par::parallel_fill(samples, vals.data(), [&](std::size_t i) {
    RngStream sub = stream.substream(i);
    const Eigen::MatrixXcd M = gue_sample(spec.N(), sub);
    return std::exp(integrand_log(spec, M));
  });
  return mc_reduce(vals);
}

CharacterSum partition_character_ratio(const ModelSpec& spec, std::int64_t K,
                                       std::uint64_t samples, RngStream stream) {
  validate_hypotheses(spec);
  if (K < 0) throw UsageError("box cutoff K must be >= 0");
  if (samples == 0) throw UsageError("samples must be positive");
  const int n = spec.N();

  const std::vector<YoungShape> shapes = enumerate_shapes(K, n);
  const std::size_t nshapes = shapes.size();
  const std::vector<double> schur_a = schur_branching_all(K, spec.A.values());
  const std::vector<double> schur_b = schur_branching_all(K, spec.B.values());

  std::vector<double> dims(nshapes), weights(nshapes);
  for (std::size_t k = 0; k < nshapes; ++k) {
    dims[k] = dim_shape(shapes[k], n);
    weights[k] = schur_a[k] * schur_b[k] / dims[k];
  }

  // Shared GUE draws: one eigendecomposition per draw feeds every shape.
  const std::size_t block_rows =
      std::max<std::size_t>(1, std::min<std::size_t>(samples, (std::size_t{1} << 22) / nshapes));
  std::vector<double> buf(block_rows * nshapes);
  std::vector<double> totals(samples);  // per-draw weighted row sums
  std::vector<MeanM2> stats(nshapes);
  std::vector<double> col(block_rows);

  for (std::size_t base = 0; base < samples; base += block_rows) {
    const std::size_t rows = std::min(block_rows, samples - base);
    par::parallel_for(rows, [&](std::size_t r) {
      RngStream sub = stream.substream(base + r);
      const Eigen::MatrixXcd M = gue_sample(n, sub);
      const std::vector<double> m = hermitian_eigenvalues(M);
      std::vector<double> x(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) x[i] = spec.phi.eval(m[i]);
      const std::vector<double> row = schur_branching_all(K, x);
      double* out = buf.data() + r * nshapes;
      std::copy(row.begin(), row.end(), out);
      std::vector<double> weighted(nshapes);
      for (std::size_t k = 0; k < nshapes; ++k) weighted[k] = weights[k] * row[k];
      totals[base + r] = par::pairwise_sum(weighted);
    });
    for (std::size_t k = 0; k < nshapes; ++k) {
      col.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) col[r] = buf[r * nshapes + k];
      stats[k] = combine(stats[k], block_stats(col));
    }
  }

  CharacterSum out;
  out.K = K;
  out.samples = samples;
  out.terms.resize(nshapes);
  std::vector<double> term_values(nshapes);
  for (std::size_t k = 0; k < nshapes; ++k) {
    CharacterTerm& t = out.terms[k];
    t.shape = shapes[k];
    t.schur_a = schur_a[k];
    t.schur_b = schur_b[k];
    t.dim = dims[k];
    t.gue_mean = stats[k].mean;
    t.gue_std_err = std_err_of(stats[k]);
    t.value = weights[k] * stats[k].mean;
    term_values[k] = t.value;
  }
  out.value = par::pairwise_sum(term_values);
  out.std_err = mc_reduce(totals).std_err;
  out.tail_bound = cauchy_tail_bound(spec.A.values(), spec.B.values(), K, spec.phi.norm());
  return out;
}

std::vector<FreeEnergyPoint> free_energy_sequence(const std::vector<ModelSpec>& specs,
                                                  std::uint64_t samples, RngStream stream) {
  if (specs.empty()) throw EmptyInput("free_energy_sequence needs at least one ModelSpec");
  for (const ModelSpec& s : specs) validate_hypotheses(s);
  // Drift check: the specs are meant to discretize one spectral law, so first
  // moments may differ only by the quantile resolution O(range / N).
  const ModelSpec& ref = specs.front();
  for (const ModelSpec& s : specs) {
    const double tol_a =
        0.5 * (s.A.range() / s.N() + ref.A.range() / ref.N()) + 1e-9;
    const double tol_b =
        0.5 * (s.B.range() / s.N() + ref.B.range() / ref.N()) + 1e-9;
    if (std::abs(s.A.mean() - ref.A.mean()) > tol_a)
      throw HypothesisViolation("first-moment drift in A across N: " +
                                std::to_string(s.A.mean()) + " vs " + std::to_string(ref.A.mean()));
    if (std::abs(s.B.mean() - ref.B.mean()) > tol_b)
      throw HypothesisViolation("first-moment drift in B across N: " +
                                std::to_string(s.B.mean()) + " vs " + std::to_string(ref.B.mean()));
  }
  std::vector<FreeEnergyPoint> out;
  out.reserve(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    FreeEnergyPoint p;
    p.N = specs[j].N();
    p.ratio = partition_mc_ratio(specs[j], samples, stream.substream(j));
    const double nn = static_cast<double>(p.N) * static_cast<double>(p.N);
    p.value = std::log(p.ratio.mean) / nn;
    p.value_std_err = p.ratio.std_err / (p.ratio.mean * nn);
    out.push_back(p);
  }
  return out;
}

}  // namespace charex
