#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "ergofit/distortion.hpp"
#include "ergofit/rng.hpp"

using namespace ergofit;

namespace {

RealSequence alternating(std::size_t n, double a, double b) {
  RealSequence y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (i % 2 == 0) ? a : b;
  return y;
}

QuantizedProcess iid_uniform(int k) {
  QuantizedProcess q;
  q.midpoints = {0.25, 0.75};
  q.k = k;
  q.probs.assign(std::size_t{1} << k, 1.0 / double(std::size_t{1} << k));
  return q;
}

QuantizedProcess period2(int k) {
  QuantizedProcess q;
  q.midpoints = {0.25, 0.75};
  q.k = k;
  q.probs.assign(std::size_t{1} << k, 0.0);
  std::size_t a01 = 0, a10 = 0;
  for (int j = 0; j < k; ++j) {
    a01 = a01 * 2 + static_cast<std::size_t>(j % 2);
    a10 = a10 * 2 + static_cast<std::size_t>((j + 1) % 2);
  }
  q.probs[a01] = 0.5;
  q.probs[a10] = 0.5;
  return q;
}

}  // namespace

TEST_CASE("quantize bins an alternating sequence into a period-2 block law") {
  auto y = alternating(1000, 0.2, 0.8);
  auto q = quantize(y, {0.5}, 2);
  q.validate();
  CHECK(q.alphabet_size() == 2);
  CHECK(q.midpoints[0] == doctest::Approx(0.0));  // edge bins half a width out
  CHECK(q.midpoints[1] == doctest::Approx(1.0));
  CHECK(q.probs[1] == doctest::Approx(0.5));  // block 01
  CHECK(q.probs[2] == doctest::Approx(0.5));  // block 10
  CHECK(q.probs[0] == doctest::Approx(0.0));
  CHECK(q.probs[3] == doctest::Approx(0.0));
}

TEST_CASE("quantize is cyclic, so the stationarity invariant holds exactly") {
  CounterRng rng(CounterRng::derive_key(13, "quantize_test"));
  RealSequence y(997);  // odd length: a non-cyclic count would break the invariant
  for (auto& v : y) v = rng.uniform01();
  auto q = quantize(y, {0.3, 0.7}, 3);
  CHECK_NOTHROW(q.validate());
  auto head = q.boundary_marginal(0);
  auto tail = q.boundary_marginal(1);
  REQUIRE(head.size() == tail.size());
  for (std::size_t i = 0; i < head.size(); ++i)
    CHECK(head[i] == doctest::Approx(tail[i]).epsilon(1e-15));
}

TEST_CASE("quantize reports the required sample size when starved") {
  RealSequence y(50, 0.5);
  try {
    quantize(y, {0.25, 0.5, 0.75}, 2);  // 16 blocks need 160 samples
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("160") != std::string::npos);
  }
}

TEST_CASE("distortion of a process against itself is zero") {
  auto p = period2(2);
  auto cost = midpoint_cost(p, p, LossSpec{});
  auto b = distortion_bounds(p, p, cost, 2);
  CHECK(b.lower == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.joining_used == "diagonal");
}

TEST_CASE("point mass vs fair i.i.d. with Hamming cost has distortion 1/2") {
  QuantizedProcess pm;
  pm.midpoints = {0.25, 0.75};
  pm.k = 1;
  pm.probs = {1.0, 0.0};
  auto q = iid_uniform(1);
  auto cost = hamming_cost(2, 2);
  auto b = distortion_bounds(pm, q, cost, 1);
  CHECK(b.lower == doctest::Approx(0.5));
  CHECK(b.upper == doctest::Approx(0.5));
}

TEST_CASE("period-2 vs i.i.d. Hamming lower bound is 1/4 at k = 2 and 3") {
  auto q = iid_uniform(3);
  auto p = period2(3);
  auto cost = hamming_cost(2, 2);
  CHECK(distortion_lower_bound(p, q, cost, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(distortion_lower_bound(p, q, cost, 2) == doctest::Approx(0.25));
  CHECK(distortion_lower_bound(p, q, cost, 3) == doctest::Approx(0.25));
}

TEST_CASE("best cyclic shift aligns the two phases of a period-2 orbit") {
  auto y0 = alternating(1000, 0.2, 0.8);
  auto y1 = alternating(1000, 0.8, 0.2);
  auto p = quantize(y0, {0.5}, 2);
  auto q = quantize(y1, {0.5}, 2);
  auto cost = hamming_cost(2, 2);
  CHECK(distortion_upper_bound(p, q, cost, JoiningStrategy::BestCyclicShift) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // The product joining pays the full mismatch instead.
  CHECK(distortion_upper_bound(p, q, cost, JoiningStrategy::Product) ==
        doctest::Approx(0.5));
}

TEST_CASE("lower bound is monotone in k and sandwiched by the upper bound") {
  auto q = iid_uniform(3);
  auto p = period2(3);
  auto cost = midpoint_cost(p, q, LossSpec{});
  double prev = -1.0;
  for (int k = 1; k <= 3; ++k) {
    auto b = distortion_bounds(p, q, cost, k);
    CHECK(b.lower >= prev - 1e-12);
    CHECK(b.lower <= b.upper + 1e-9);
    prev = b.lower;
  }
}

TEST_CASE("diagonal joining requires equal processes") {
  auto p = period2(2);  // equal 1-marginals but different 2-block laws
  auto q = iid_uniform(2);
  auto cost = hamming_cost(2, 2);
  CHECK_THROWS_AS(distortion_upper_bound(p, q, cost, JoiningStrategy::DiagonalIfEqual),
                  std::invalid_argument);
}

TEST_CASE("coupling solution is a valid coupling and serializes") {
  auto p = period2(2);
  auto q = iid_uniform(2);
  auto cost = hamming_cost(2, 2);
  auto sol = solve_coupling_lp(p, q, cost, 2);
  CHECK(sol.a_blocks == 4);
  CHECK(sol.b_blocks == 4);
  double total = 0.0;
  for (std::size_t i = 0; i < sol.a_blocks; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < sol.b_blocks; ++j) {
      double v = sol.coupling[i * sol.b_blocks + j];
      CHECK(v >= -1e-12);
      row += v;
    }
    CHECK(row == doctest::Approx(p.probs[i]).epsilon(1e-9));
    total += row;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(coupling_csv(sol).find(',') != std::string::npos);
}
