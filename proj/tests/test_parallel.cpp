#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "charex/parallel.hpp"
#include "charex/sampling.hpp"

using namespace charex;

TEST_CASE("pairwise sum matches exact rationals and beats naive accumulation") {
  std::vector<double> v(1000, 0.1);
  double s = par::pairwise_sum(v);
  CHECK(s == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(par::pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(par::pairwise_sum(std::vector<double>{2.5}) == 2.5);
}

TEST_CASE("serial and openmp fills are bit-identical") {
  auto kernel = [](std::size_t i) {
    RngStream s(99, 0);
    RngStream sub = s.substream(i);
    double acc = 0.0;
    for (int k = 0; k < 16; ++k) acc += std::sin(sub.normal());
    return acc;
  };
  const std::size_t n = 4096;
  std::vector<double> a(n), b(n);
  par::parallel_fill(n, a.data(), kernel, par::ExecPolicy::serial);
  par::parallel_fill(n, b.data(), kernel, par::ExecPolicy::openmp);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(a[i] == b[i]);
  CHECK(par::map_sum(n, kernel, par::ExecPolicy::serial) ==
        par::map_sum(n, kernel, par::ExecPolicy::openmp));
}

TEST_CASE("reduction independent of thread count") {
#ifdef _OPENMP
  auto kernel = [](std::size_t i) {
    RngStream sub = RngStream(7, 1).substream(i);
    return std::exp(0.25 * sub.normal());
  };
  const std::size_t n = 10000;
  double ref = par::map_sum(n, kernel, par::ExecPolicy::serial);
  for (int threads : {1, 2, 3, 7}) {
    omp_set_num_threads(threads);
    CHECK(par::map_sum(n, kernel, par::ExecPolicy::openmp) == ref);
  }
  omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("mc estimates identical under either policy") {
  const std::size_t n = 5000;
  RngStream root(5, 2);
  auto kernel = [&](std::size_t i) {
    RngStream s = root.substream(i);
    return s.uniform01() * s.uniform01();
  };
  std::vector<double> buf_s(n), buf_p(n);
  par::parallel_fill(n, buf_s.data(), kernel, par::ExecPolicy::serial);
  par::parallel_fill(n, buf_p.data(), kernel, par::ExecPolicy::openmp);
  auto es = mc_reduce(buf_s);
  auto ep = mc_reduce(buf_p);
  CHECK(es.mean == ep.mean);
  CHECK(es.std_err == ep.std_err);
}
