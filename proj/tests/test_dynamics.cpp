#include <cmath>
#include <omp.h>
#include <stdexcept>

#include "doctest.h"
#include "ergofit/dynamics.hpp"
#include "ergofit/families.hpp"

using namespace ergofit;

TEST_CASE("orbit matches manual iteration of the logistic map") {
  auto fam = make_logistic(0.0, 4.0);
  auto u = orbit(fam, {3.2}, {0.4}, 5);
  REQUIRE(u.size() == 5);
  double x = 0.4;
  for (int k = 0; k < 5; ++k) {
    CHECK(u[k] == doctest::Approx(x).epsilon(1e-15));
    x = 3.2 * x * (1.0 - x);
  }
}

TEST_CASE("orbit rejects out-of-domain arguments") {
  auto fam = make_logistic(0.0, 4.0);
  CHECK_THROWS_AS(orbit(fam, {5.0}, {0.4}, 3), std::domain_error);
  CHECK_THROWS_AS(orbit(fam, {3.2}, {1.4}, 3), std::domain_error);
}

TEST_CASE("pseudo_metric hand values") {
  std::vector<double> u = {0.0, 0.0, 0.0, 0.0};
  std::vector<double> v = {1.0, -1.0, 0.0, 2.0};
  CHECK(pseudo_metric(u, v, 1.0) == doctest::Approx(1.0));              // (1+1+0+2)/4
  CHECK(pseudo_metric(u, v, 2.0) == doctest::Approx(std::sqrt(1.5)));   // sqrt(6/4)
  CHECK(pseudo_metric(u, v, kPInf) == doctest::Approx(2.0));
}

TEST_CASE("pseudo_metric_above agrees with pseudo_metric when below cutoff") {
  std::vector<double> u = {0.1, 0.7, 0.3, 0.9, 0.5};
  std::vector<double> v = {0.2, 0.4, 0.35, 0.8, 0.45};
  for (double p : {1.0, 2.0, kPInf}) {
    double d = pseudo_metric(u, v, p);
    CHECK(pseudo_metric_above(u, v, p, 10.0) == doctest::Approx(d));
    CHECK(pseudo_metric_above(u, v, p, d * 0.5) > d * 0.5);
  }
}

TEST_CASE("sample_sequences layout is grid order, theta outer") {
  auto fam = make_logistic(0.0, 4.0);
  std::vector<Theta> thetas = {{2.0}, {3.0}};
  std::vector<State> xs = {{0.25}, {0.5}, {0.75}};
  auto s = sample_sequences(fam, thetas, xs, 4);
  CHECK(s.entry_count() == 6);
  CHECK(s.values.size() == 24);
  CHECK(s.entry_theta(4)[0] == doctest::Approx(3.0));
  CHECK(s.entry_x0(4)[0] == doctest::Approx(0.5));
  auto direct = orbit(fam, {3.0}, {0.5}, 4);
  auto seq = s.seq(4);
  for (int k = 0; k < 4; ++k) CHECK(seq[k] == doctest::Approx(direct[k]));
}

TEST_CASE("sample_sequences is thread-count independent") {
  auto fam = make_logistic(0.0, 4.0);
  std::vector<Theta> thetas;
  for (int i = 0; i <= 16; ++i) thetas.push_back({4.0 * i / 16});
  std::vector<State> xs;
  for (int i = 0; i < 8; ++i) xs.push_back({(i + 0.5) / 8});

  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto s1 = sample_sequences(fam, thetas, xs, 32);
  omp_set_num_threads(4);
  auto s4 = sample_sequences(fam, thetas, xs, 32);
  omp_set_num_threads(saved);
  CHECK(s1.values == s4.values);
}
