#include <cmath>
#include <omp.h>
#include <stdexcept>

#include "doctest.h"
#include "ergofit/families.hpp"
#include "ergofit/meanwidth.hpp"
#include "ergofit/rng.hpp"

using namespace ergofit;

TEST_CASE("noise model validation") {
  NoiseModel g;
  g.sigma = 1.0;
  CHECK_NOTHROW(g.validate());
  g.sigma = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  NoiseModel u;
  u.kind = NoiseModel::Kind::Uniform;
  u.half_width = -1.0;
  CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}

TEST_CASE("gaussian draws have roughly the right first two moments") {
  NoiseModel g;
  g.sigma = 2.0;
  CounterRng rng(CounterRng::derive_key(42, "moments"));
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = g.draw(rng);
    s += v;
    s2 += v * v;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(s2 / n == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("tracking oracle follows the sign pattern and replays forward") {
  CounterRng rng(CounterRng::derive_key(7, "track_eps"));
  RealSequence eps(24);
  for (auto& e : eps) e = rng.gaussian();
  auto tr = tracking_oracle_logistic4(eps);
  REQUIRE(tr.orbit.size() == eps.size());
  double value = 0.0;
  double x = tr.x0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    CHECK(tr.orbit[k] == doctest::Approx(x).epsilon(1e-6));
    if (eps[k] > 0)
      CHECK(tr.orbit[k] >= 0.5 - 1e-9);
    else
      CHECK(tr.orbit[k] <= 0.5 + 1e-9);
    value += tr.orbit[k] * eps[k];
    x = 4.0 * x * (1.0 - x);
  }
  CHECK(tr.value == doctest::Approx(value).epsilon(1e-9));
  RealSequence too_long(41, 1.0);
  CHECK_THROWS_AS(tracking_oracle_logistic4(too_long), std::domain_error);
}

TEST_CASE("tracked_orbit matches tracking_oracle at shared depths") {
  CounterRng rng(CounterRng::derive_key(9, "track_eps2"));
  RealSequence eps(32);
  for (auto& e : eps) e = rng.gaussian();
  auto a = tracking_oracle_logistic4(eps);
  auto b = tracked_orbit_logistic4(eps);
  CHECK(a.x0 == doctest::Approx(b.x0).epsilon(1e-9));
  for (std::size_t k = 0; k < eps.size(); ++k)
    CHECK(a.orbit[k] == doctest::Approx(b.orbit[k]).epsilon(1e-6));
}

TEST_CASE("tracked_orbit stays a true orbit at depth beyond double replay") {
  CounterRng rng(CounterRng::derive_key(11, "track_eps3"));
  RealSequence eps(128);
  for (auto& e : eps) e = rng.gaussian();
  auto tr = tracked_orbit_logistic4(eps);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (eps[k] > 0)
      CHECK(tr.orbit[k] >= 0.5 - 1e-9);
    else
      CHECK(tr.orbit[k] <= 0.5 + 1e-9);
  }
  // Linear-in-n witness value: sum u_k eps_k with u_k in the eps_k half.
  CHECK(tr.value / eps.size() > 0.2);
}

TEST_CASE("sigma0 formula and guard") {
  CHECK(sigma0(1.0, 0.25) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sigma0(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("mean_width_n is deterministic across thread counts") {
  auto fam = make_logistic(0.0, 3.5);
  NoiseModel g;
  OptimizerConfig opt;
  opt.grid_points = 9;
  opt.refine_rounds = 1;
  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto e1 = mean_width_n(fam, g, 32, 8, opt, 123);
  omp_set_num_threads(4);
  auto e4 = mean_width_n(fam, g, 32, 8, opt, 123);
  omp_set_num_threads(saved);
  CHECK(e1.kappa_over_n == e4.kappa_over_n);
  CHECK(e1.stderr_ == e4.stderr_);
}

TEST_CASE("subadditive_within checks pairs whose sum is a computed horizon") {
  MeanWidthReport rep;
  rep.entries.push_back({16, 0.50, 0.01, 8, "grid", false});
  rep.entries.push_back({32, 0.40, 0.01, 8, "grid", false});
  rep.entries.push_back({48, 0.30, 0.01, 8, "grid", false});
  // kappa_48 = 14.4 <= kappa_16 + kappa_32 = 20.8: fine.
  CHECK(rep.subadditive_within(3.0));
  rep.entries[2].kappa_over_n = 0.95;  // kappa_48 = 45.6 > 20.8 by many se
  CHECK_FALSE(rep.subadditive_within(3.0));
}

TEST_CASE("sudakov_check pairs matching horizons") {
  ComplexityReport cr;
  cr.p = 2.0;
  cr.radii = {0.5};
  cr.horizons = {16, 32};
  cr.cover_counts = {{64}, {4096}};
  cr.pack_counts = cr.cover_counts;
  cr.slopes = {0.0};
  MeanWidthReport wr;
  wr.noise = NoiseModel{};
  wr.entries.push_back({16, 0.30, 0.001, 8, "grid", false});
  wr.entries.push_back({32, 0.30, 0.001, 8, "grid", false});
  auto cells = sudakov_check(cr, wr);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) {
    CHECK(c.rhs == doctest::Approx((c.delta / 6) *
                                   std::sqrt(std::log(c.n == 16 ? 64.0 : 4096.0) / c.n)));
    CHECK(c.lhs == doctest::Approx(0.30 + 3 * 0.001));
    CHECK(c.pass == (c.lhs >= c.rhs));
    CHECK(c.pass);
  }
}
