#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "charex/sampling.hpp"

using namespace charex;

TEST_CASE("streams are reproducible and substreams decorrelated") {
  RngStream a(42, 0), b(42, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 1);
  int same = 0;
  RngStream a2(42, 0);
  for (int i = 0; i < 64; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);
  // substream determinism
  RngStream root(7, 3);
  CHECK(root.substream(5).stream_id() == root.substream(5).stream_id());
  CHECK(root.substream(5).stream_id() != root.substream(6).stream_id());
}

TEST_CASE("uniform01 range and crude moments") {
  RngStream s(1, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("normal moments") {
  RngStream s(2, 0);
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  CHECK(m1 / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(std::abs(m1 / n) < 0.02);
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("mc_reduce frozen example and pairwise determinism") {
  auto e = mc_reduce({0.0, 1.0});
  CHECK(e.mean == doctest::Approx(0.5));
  CHECK(e.std_err == doctest::Approx(0.5));
  CHECK(e.n == 2);
  auto e1 = mc_reduce({3.25});
  CHECK(e1.mean == 3.25);
  CHECK(e1.std_err == 0.0);
  CHECK_THROWS_AS(mc_reduce({}), EmptyInput);
}

TEST_CASE("haar samples are unitary and reproduce the |u_22|^2 law") {
  RngStream root(11, 0);
  // E |u_ij|^2 = 1/N; for N = 2, |u_22|^2 is Uniform(0,1): mean 1/2, var 1/12
  const int n = 20000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXcd U = haar_sample(2, root.substream(i));
    double v = std::norm(U(1, 1));
    s1 += v;
    s2 += v * v;
  }
  double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("haar second moment E|u_ij|^2 = 1/N at N = 3") {
  RngStream root(13, 0);
  const int n = 20000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXcd U = haar_sample(3, root.substream(i));
    acc += U.cwiseAbs2();
  }
  acc /= n;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(acc(i, j) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("gue normalization: E tr M^2 = N and hermiticity") {
  for (int N : {2, 5}) {
    RngStream root(17, N);
    const int n = 10000;
    std::vector<double> tr2(n);
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXcd M = gue_sample(N, root.substream(i));
      CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() == 0.0);
      tr2[i] = (M * M).trace().real();
    }
    auto e = mc_reduce(tr2);
    CHECK(std::abs(e.mean - N) < 5.0 * e.std_err + 1e-9);
  }
}

TEST_CASE("gue spectrum approaches the semicircle (KS distance)") {
  // pooled empirical CDF of eigenvalues at N = 24 vs the semicircle CDF
  const int N = 24, draws = 200;
  RngStream root(23, 0);
  std::vector<double> eig;
  eig.reserve(N * draws);
  for (int d = 0; d < draws; ++d) {
    auto ev = hermitian_eigenvalues(gue_sample(N, root.substream(d)));
    eig.insert(eig.end(), ev.begin(), ev.end());
  }
  std::sort(eig.begin(), eig.end());
  auto semicircle_cdf = [](double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    const double pi = 3.14159265358979323846;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * pi) + std::asin(x / 2.0) / pi;
  };
  double ks = 0.0;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    double F = semicircle_cdf(eig[i]);
    double lo = static_cast<double>(i) / eig.size();
    double hi = static_cast<double>(i + 1) / eig.size();
    ks = std::max(ks, std::max(std::abs(F - lo), std::abs(F - hi)));
  }
  CHECK(ks <= 0.05);
}
