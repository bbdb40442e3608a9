#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ergofit/complexity.hpp"
#include "ergofit/families.hpp"
#include "ergofit/rng.hpp"

using namespace ergofit;

namespace {

SequenceSample random_sample(std::size_t entries, int n, std::uint64_t seed,
                             double lo = -1.0, double hi = 1.0) {
  SequenceSample s;
  s.family_id = "random";
  s.n = n;
  s.theta_grid.assign(entries, Theta{});
  s.x_grid = {State{}};
  CounterRng rng(CounterRng::derive_key(seed, "test_sample"));
  s.values.resize(entries * static_cast<std::size_t>(n));
  for (auto& v : s.values) v = rng.uniform(lo, hi);
  return s;
}

}  // namespace

TEST_CASE("greedy_packing on a hand-built sample") {
  // Three constant sequences at 0, 0.3, 1.0; in d_{n,inf} with r = 0.5 the
  // greedy pass keeps 0 and 1.0 (0.3 is within 0.5 of 0).
  SequenceSample s;
  s.n = 4;
  s.theta_grid = {{0.0}, {1.0}, {2.0}};
  s.x_grid = {State{}};
  s.values = {0, 0, 0, 0, 0.3, 0.3, 0.3, 0.3, 1, 1, 1, 1};
  auto pr = greedy_packing(s, 0.5, kPInf);
  CHECK(pr.count == 2);
  REQUIRE(pr.indices.size() == 2);
  CHECK(pr.indices[0] == 0);
  CHECK(pr.indices[1] == 2);
}

TEST_CASE("greedy_packing equals the serial reference implementation") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    auto s = random_sample(200, 24, seed);
    for (double p : {1.0, 2.0, kPInf}) {
      for (double r : {0.1, 0.4, 0.9}) {
        auto fast = greedy_packing(s, r, p);
        auto ref = greedy_packing_ref(s, r, p);
        CHECK(fast.count == ref.count);
        CHECK(fast.indices == ref.indices);
      }
    }
  }
}

TEST_CASE("greedy_packing respects the horizon restriction") {
  auto s = random_sample(100, 16, 11);
  auto full = greedy_packing(s, 0.5, 2.0);
  auto short8 = greedy_packing(s, 0.5, 2.0, 8);
  auto ref8 = greedy_packing_ref(s, 0.5, 2.0, 8);
  CHECK(short8.count == ref8.count);
  CHECK(short8.indices == ref8.indices);
  CHECK(short8.count <= full.count);  // coarser metric packs no more points
}

TEST_CASE("covering and packing numbers interlace: M(2r) <= N(r) <= M(r)") {
  auto s = random_sample(300, 12, 5);
  for (double p : {1.0, 2.0, kPInf}) {
    for (double r : {0.15, 0.3, 0.6}) {
      std::size_t m_r = greedy_packing(s, r, p).count;
      std::size_t n_r = cover_count(s, r, p);
      std::size_t m_2r = greedy_packing(s, 2 * r, p).count;
      CHECK(m_2r <= n_r);
      CHECK(n_r <= m_r);
    }
  }
}

TEST_CASE("entropy_profile refuses cells over budget") {
  auto fam = make_logistic(4.0, 4.0);
  std::vector<State> xs;
  for (int i = 0; i < 64; ++i) xs.push_back({(i + 0.5) / 64});
  EntropyProfileConfig cfg;
  cfg.radii = {0.1};
  cfg.horizons = {4, 8};
  cfg.cell_budget = 64 * 4;  // only the first horizon fits
  auto rep = entropy_profile(fam, {{4.0}}, xs, cfg);
  CHECK(rep.pack_counts[0][0] != ComplexityReport::kRefusedCell);
  CHECK(rep.pack_counts[1][0] == ComplexityReport::kRefusedCell);
}

TEST_CASE("block_entropy of an i.i.d. uniform law is log alphabet") {
  QuantizedProcess q;
  q.midpoints = {0.25, 0.75};
  q.k = 3;
  q.probs.assign(8, 1.0 / 8.0);
  q.validate();
  CHECK(block_entropy(q) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("block_entropy of a period-2 law is zero beyond k = 1") {
  QuantizedProcess q;
  q.midpoints = {0.0, 1.0};
  q.k = 2;
  q.probs = {0.0, 0.5, 0.5, 0.0};  // blocks 01 and 10 only
  q.validate();
  CHECK(block_entropy(q) == doctest::Approx(std::log(2.0) / 2));
}

TEST_CASE("binary_entropy2 values") {
  CHECK(binary_entropy2(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy2(0.0) == doctest::Approx(0.0));
  CHECK(binary_entropy2(1.0) == doctest::Approx(0.0));
  CHECK(binary_entropy2(0.25) == doctest::Approx(0.811278124459133));
}

TEST_CASE("packing_bound_check rejects probes outside the l_p ball") {
  RealSequence u(8, 0.0);
  SequenceSample probes;
  probes.n = 8;
  probes.theta_grid = {{0.0}};
  probes.x_grid = {State{}};
  probes.values.assign(8, 0.9);  // d_{8,2} = 0.9 > eps(0.5, 2) ~ 0.125
  CHECK_THROWS_AS(packing_bound_check(u, 0.5, 2.0, 1.0, probes), std::domain_error);
  CHECK_THROWS_AS(packing_bound_check(u, 1.5, 2.0, 1.0, probes), std::invalid_argument);
  CHECK_THROWS_AS(packing_bound_check(u, 0.5, kPInf, 1.0, probes), std::invalid_argument);
}

TEST_CASE("packing_bound_check passes on in-ball probes") {
  const double delta = 0.5, p = 2.0, K = 1.0;
  const int n = 16;
  const double eps = std::pow(delta / 2, (1 + p) / p);
  RealSequence u(n);
  CounterRng rng(CounterRng::derive_key(3, "pack_u"));
  for (auto& v : u) v = rng.uniform(-K, K);

  SequenceSample probes;
  probes.n = n;
  probes.x_grid = {State{}};
  for (int j = 0; j < 20; ++j) {
    probes.theta_grid.push_back({static_cast<double>(j)});
    RealSequence d(n);
    double norm = 0.0;
    for (auto& v : d) {
      v = rng.uniform(-1.0, 1.0);
      norm += std::pow(std::abs(v), p);
    }
    norm = std::pow(norm / n, 1.0 / p);
    double scale = 0.999 * eps * rng.uniform01() / norm;
    for (int i = 0; i < n; ++i) {
      double w = u[i] + scale * d[i];
      probes.values.push_back(std::min(K, std::max(-K, w)));
    }
  }
  auto res = packing_bound_check(u, delta, p, K, probes);
  CHECK(res.pass);
  CHECK(res.measured <= res.bound);
}
