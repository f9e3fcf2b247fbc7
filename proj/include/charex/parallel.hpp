#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace charex::par {

// Execution policy for the hot kernels.  `openmp` fans work out with
// `#pragma omp parallel for`; `serial` is the reference implementation the
// tests compare against.  Results are bit-identical by construction: every
// work item writes to its own slot and reductions always run over the filled
// buffer in a fixed order, so the policy (and thread count) never changes
// the arithmetic.
enum class ExecPolicy { serial, openmp };

ExecPolicy default_policy();
void set_default_policy(ExecPolicy p);
int max_threads();

// Fills out[i] = fn(i) for i in [0, n).
void parallel_fill(std::size_t n, double* out, const std::function<double(std::size_t)>& fn,
                   ExecPolicy policy);
void parallel_fill(std::size_t n, double* out, const std::function<double(std::size_t)>& fn);

// Runs fn(i) for i in [0, n).  fn must write only to slots owned by item i
// (same disjoint-writes discipline as parallel_fill, for work items that
// produce more than one value).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, ExecPolicy policy);
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Fixed-order pairwise (tree) summation: split at the midpoint, sum halves
// recursively.  Deterministic regardless of policy/thread count, and far more
// accurate than naive accumulation on long MC buffers.
double pairwise_sum(const double* v, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

// Convenience: evaluate fn on [0,n) under the policy and pairwise-sum.
double map_sum(std::size_t n, const std::function<double(std::size_t)>& fn, ExecPolicy policy);
double map_sum(std::size_t n, const std::function<double(std::size_t)>& fn);

}  // namespace charex::par
