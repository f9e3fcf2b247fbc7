#include "charex/parallel.hpp"

#include <atomic>

namespace charex::par {

namespace {
std::atomic<ExecPolicy> g_policy{
#ifdef _OPENMP
    ExecPolicy::openmp
#else
    ExecPolicy::serial
#endif
};
}  // namespace

ExecPolicy default_policy() { return g_policy.load(); }
void set_default_policy(ExecPolicy p) { g_policy.store(p); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_fill(std::size_t n, double* out, const std::function<double(std::size_t)>& fn,
                   ExecPolicy policy) {
#ifdef _OPENMP
  if (policy == ExecPolicy::openmp) {
    const std::int64_t m = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) out[i] = fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)policy;
#endif
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
}

void parallel_fill(std::size_t n, double* out, const std::function<double(std::size_t)>& fn) {
  parallel_fill(n, out, fn, default_policy());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, ExecPolicy policy) {
#ifdef _OPENMP
  if (policy == ExecPolicy::openmp) {
    const std::int64_t m = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)policy;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for(n, fn, default_policy());
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

double map_sum(std::size_t n, const std::function<double(std::size_t)>& fn, ExecPolicy policy) {
  std::vector<double> buf(n);
  parallel_fill(n, buf.data(), fn, policy);
  return pairwise_sum(buf);
}

double map_sum(std::size_t n, const std::function<double(std::size_t)>& fn) {
  return map_sum(n, fn, default_policy());
}

}  // namespace charex::par
