#include "charex/shape_gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "charex/measures.hpp"
#include "charex/spherical.hpp"

namespace charex {

namespace {

// log Delta(l/N) = sum_{i<j} log((l_i - l_j)/N); l is strictly decreasing.
double log_vandermonde(const LSequence& l, int N) {
  double s = 0.0;
  const std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      s += std::log(static_cast<double>(l[i] - l[j]));
  return s - 0.5 * static_cast<double>(n) * static_cast<double>(n - 1) *
                 std::log(static_cast<double>(N));
}

SpectrumSet l_spectrum(const LSequence& l, int N) {
  std::vector<double> x(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    x[i] = static_cast<double>(l[i]) / static_cast<double>(N);
  return SpectrumSet(std::move(x));
}

// Scalars the incremental updates maintain; fully reconstructible from l.
struct Running {
  double m_f = 0.0;       // int f dmu_hat
  double c_sum = 0.0;     // sum_i c(l_i / N)
  double log_delta = 0.0; // log Delta(l/N)           (a + b > 0 only)
  double log_ia = 0.0;    // log I_N(log A_N, l/N)    (a > 0 only)
  double log_ib = 0.0;    // log I_N(log B_N, l/N)    (b > 0 only)
};

// The weight evaluator with the marginals realized once as N-point spectra.
struct WeightModel {
  const EnsembleSpec* ens = nullptr;
  int N = 0;
  bool need_i = false;
  std::unique_ptr<SpectrumSet> log_a, log_b;

  static WeightModel make(const EnsembleSpec& e, int N) {
    WeightModel m;
    m.ens = &e;
    m.N = N;
    m.need_i = e.a > 0.0 || e.b > 0.0;
    if (e.a > 0.0)
      m.log_a = std::make_unique<SpectrumSet>(SpectrumSet(paper_quantiles(e.mu_A, N)).map_log());
    if (e.b > 0.0)
      m.log_b = std::make_unique<SpectrumSet>(SpectrumSet(paper_quantiles(e.mu_B, N)).map_log());
    return m;
  }

  Running recompute(const LSequence& l) const {
    Running r;
    const double dN = static_cast<double>(N);
    for (std::int64_t li : l) {
      const double x = static_cast<double>(li) / dN;
      r.m_f += ens->F.f.eval(x) / dN;
      r.c_sum += ens->c.eval(x);
    }
    if (need_i) {
      r.log_delta = log_vandermonde(l, N);
      const SpectrumSet ln = l_spectrum(l, N);
      if (log_a) r.log_ia = hciz_exact(*log_a, ln).log_value;
      if (log_b) r.log_ib = hciz_exact(*log_b, ln).log_value;
    }
    return r;
  }

  double log_weight(const Running& r) const {
    const double dN = static_cast<double>(N);
    const double F_val = ens->F.f0 + ens->F.w1 * r.m_f + ens->F.w2 * r.m_f * r.m_f;
    double lw = dN * dN * F_val - dN * r.c_sum;
    if (need_i)
      lw += (ens->a + ens->b) * r.log_delta + ens->a * r.log_ia + ens->b * r.log_ib;
    return lw;
  }
};

// A corner move applied to row `row` (row == rows() means a new bottom row).
struct Move {
  int row = 0;
  int dir = 0;  // +1 add box, -1 remove box
};

// Legal moves in corner_moves order: additions top row downward (new row
// last), then removals top row downward.  max_boxes > 0 caps |lambda|.
void legal_moves(const YoungShape& shape, int N, std::int64_t max_boxes,
                 std::vector<Move>& out) {
  out.clear();
  const auto& p = shape.parts();
  const int r = static_cast<int>(p.size());
  const bool can_add = max_boxes <= 0 || shape.boxes() + 1 <= max_boxes;
  if (can_add) {
    for (int i = 0; i < r; ++i)
      if (i == 0 || p[i] < p[i - 1]) out.push_back({i, +1});
    if (r < N) out.push_back({r, +1});
  }
  for (int i = 0; i < r; ++i)
    if (i == r - 1 || p[i] > p[i + 1]) out.push_back({i, -1});
}

YoungShape apply_move(const YoungShape& shape, Move mv) {
  std::vector<std::int64_t> np(shape.parts());
  if (mv.row == static_cast<int>(np.size()))
    np.push_back(1);
  else
    np[mv.row] += mv.dir;
  return YoungShape(std::move(np));
}

DiscreteMeasure profile_from_counts(const std::vector<double>& counts, int N,
                                    double total) {
  std::vector<double> pos, w;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 0.0) {
      pos.push_back(static_cast<double>(k) / static_cast<double>(N));
      w.push_back(counts[k] / total);
    }
  return DiscreteMeasure(std::move(pos), std::move(w));
}

}  // namespace

double shape_log_weight(const YoungShape& shape, int N, const EnsembleSpec& ens) {
  if (N < 1) throw UsageError("shape_log_weight needs N >= 1");
  const LSequence l = l_sequence(shape, N);
  const WeightModel model = WeightModel::make(ens, N);
  return model.log_weight(model.recompute(l));
}

GibbsResult metropolis_sample(int N, std::int64_t steps, const EnsembleSpec& ens,
                              RngStream stream, const GibbsOptions& opts) {
  if (N < 1) throw UsageError("metropolis_sample needs N >= 1");
  if (steps < 1) throw UsageError("metropolis_sample needs steps >= 1");
  const std::int64_t burn_in = opts.burn_in < 0 ? steps / 5 : opts.burn_in;
  if (burn_in > steps) throw UsageError("burn-in exceeds the step budget");
  if (opts.max_boxes > 0 && opts.start.boxes() > opts.max_boxes)
    throw UsageError("start shape exceeds max_boxes");
  const std::int64_t reval = std::max<std::int64_t>(1, opts.revalidate_every);

  const WeightModel model = WeightModel::make(ens, N);
  YoungShape shape = opts.start;
  LSequence l = l_sequence(shape, N);
  Running run = model.recompute(l);
  double log_w = model.log_weight(run);
  const double dN = static_cast<double>(N);

  std::vector<Move> moves_cur, moves_prop;
  legal_moves(shape, N, opts.max_boxes, moves_cur);

  std::vector<double> counts, counts_h1, counts_h2;  // indexed by the integer l value
  auto bump = [](std::vector<double>& c, const LSequence& lv) {
    for (std::int64_t li : lv) {
      if (li >= static_cast<std::int64_t>(c.size()))
        c.resize(static_cast<std::size_t>(li) + 1, 0.0);
      c[static_cast<std::size_t>(li)] += 1.0;
    }
  };

  const std::int64_t n_samples = steps - burn_in;
  const std::int64_t half1 = n_samples / 2;
  std::int64_t accepted = 0;
  double max_drift = 0.0;

  for (std::int64_t s = 0; s < steps; ++s) {
    const std::size_t n_cur = moves_cur.size();
    const std::size_t pick = std::min(
        static_cast<std::size_t>(stream.uniform01() * static_cast<double>(n_cur)),
        n_cur - 1);
    const Move mv = moves_cur[pick];
    YoungShape proposal = apply_move(shape, mv);
    legal_moves(proposal, N, opts.max_boxes, moves_prop);

    // Incremental log-weight change: one l entry moves by +-1.
    const std::int64_t li_old = l[static_cast<std::size_t>(mv.row)];
    const std::int64_t li_new = li_old + mv.dir;
    const double x_old = static_cast<double>(li_old) / dN;
    const double x_new = static_cast<double>(li_new) / dN;
    const double d_mf = (ens.F.f.eval(x_new) - ens.F.f.eval(x_old)) / dN;
    const double mf_new = run.m_f + d_mf;
    const double d_F = dN * dN *
        (ens.F.w1 * d_mf + ens.F.w2 * (mf_new * mf_new - run.m_f * run.m_f));
    const double d_c_val = ens.c.eval(x_new) - ens.c.eval(x_old);
    double d_logw = d_F - dN * d_c_val;
    double d_delta = 0.0, ia_new = 0.0, ib_new = 0.0;
    if (model.need_i) {
      for (std::size_t j = 0; j < l.size(); ++j) {
        if (static_cast<int>(j) == mv.row) continue;
        d_delta += std::log(std::abs(static_cast<double>(li_new - l[j]))) -
                   std::log(std::abs(static_cast<double>(li_old - l[j])));
      }
      LSequence l2(l);
      l2[static_cast<std::size_t>(mv.row)] = li_new;
      const SpectrumSet ln = l_spectrum(l2, N);
      if (model.log_a) ia_new = hciz_exact(*model.log_a, ln).log_value;
      if (model.log_b) ib_new = hciz_exact(*model.log_b, ln).log_value;
      d_logw += (ens.a + ens.b) * d_delta + ens.a * (ia_new - run.log_ia) +
                ens.b * (ib_new - run.log_ib);
    }

    const double log_alpha =
        d_logw + std::log(static_cast<double>(n_cur) /
                          static_cast<double>(moves_prop.size()));
    const double u = stream.uniform01();
    if (std::log(u) < log_alpha) {
      shape = std::move(proposal);
      l[static_cast<std::size_t>(mv.row)] = li_new;
      run.m_f = mf_new;
      run.c_sum += d_c_val;
      run.log_delta += d_delta;
      run.log_ia = ia_new;
      run.log_ib = ib_new;
      log_w += d_logw;
      moves_cur.swap(moves_prop);
      ++accepted;
    }

    if (s >= burn_in) {
      bump(counts, l);
      bump(s - burn_in < half1 ? counts_h1 : counts_h2, l);
    }
    if ((s + 1) % reval == 0) {
      const Running full = model.recompute(l);
      const double lw_full = model.log_weight(full);
      max_drift = std::max(max_drift, std::abs(lw_full - log_w));
      log_w = lw_full;
      run = full;
    }
    if (opts.observer) opts.observer(ChainState{shape, log_w, s + 1});
  }

  // Final resync so the returned state satisfies the log-weight invariant
  // exactly; the drift history stays in max_drift.
  {
    const Running full = model.recompute(l);
    const double lw_full = model.log_weight(full);
    max_drift = std::max(max_drift, std::abs(lw_full - log_w));
    log_w = lw_full;
  }

  GibbsResult res{ChainState{shape, log_w, steps},
                  n_samples > 0 ? profile_from_counts(counts, N, dN * static_cast<double>(n_samples))
                                : empirical_measure(shape, N),
                  static_cast<double>(accepted) / static_cast<double>(steps),
                  0.0,
                  max_drift,
                  accepted,
                  steps,
                  burn_in};
  if (half1 > 0 && n_samples - half1 > 0) {
    const DiscreteMeasure p1 =
        profile_from_counts(counts_h1, N, dN * static_cast<double>(half1));
    const DiscreteMeasure p2 =
        profile_from_counts(counts_h2, N, dN * static_cast<double>(n_samples - half1));
    res.split_chain_distance = bl_distance(p1, p2);
  }
  return res;
}

}  // namespace charex
