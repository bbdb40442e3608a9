#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergofit/dynamics.hpp"

namespace ergofit {

struct PackingResult {
  std::size_t count = 0;                // M
  std::vector<std::uint32_t> indices;   // representatives, in sample order
};

// Maximal r-separated subset built by a single greedy pass in sample order
// (optionally restricted to the first `horizon` coordinates). Deterministic.
// The fast path prunes with a spatial hash on a short coordinate prefix and
// is exact; `greedy_packing_ref` is the plain quadratic pass kept as the
// reference implementation.
PackingResult greedy_packing(const SequenceSample& sample, double r, double p,
                             int horizon = -1);
PackingResult greedy_packing_ref(const SequenceSample& sample, double r, double p,
                                 int horizon = -1);

// Greedy cover with centers drawn from the sample; N satisfies
// M(2r) <= N(r) <= M(r). The greedy pass that builds a maximal packing is
// also a cover, so this shares the packing kernel.
std::size_t cover_count(const SequenceSample& sample, double r, double p,
                        int horizon = -1);

struct ComplexityReport {
  std::string family_id;
  double p = kPInf;
  std::vector<double> radii;
  std::vector<int> horizons;
  // tables indexed [horizon][radius]; kRefusedCell marks budget-refused cells
  std::vector<std::vector<std::size_t>> pack_counts;
  std::vector<std::vector<std::size_t>> cover_counts;
  std::vector<double> slopes;  // per-radius LS slope of log N vs n, top half of horizons

  static constexpr std::size_t kRefusedCell = static_cast<std::size_t>(-1);
};

struct EntropyProfileConfig {
  double p = kPInf;
  std::vector<double> radii;
  std::vector<int> horizons;          // strictly increasing
  std::size_t cell_budget = 200000000;  // refuse cells with |sample| * n above this
};

// Covering/packing tables over the (horizon, radius) grid for the sample of
// sequences generated by (theta_grid x x_grid), with per-radius entropy-rate
// slopes fitted on the top half of the horizons.
ComplexityReport entropy_profile(const ModelFamily& fam, const std::vector<Theta>& theta_grid,
                                 const std::vector<State>& x_grid,
                                 const EntropyProfileConfig& cfg);
// Same, for an already materialized sample at horizon >= max(cfg.horizons).
ComplexityReport entropy_profile(const SequenceSample& sample, const EntropyProfileConfig& cfg);

// Finite-alphabet k-block distribution of a stationary process.
struct QuantizedProcess {
  std::vector<double> midpoints;  // per-symbol representative values
  int k = 1;
  std::vector<double> probs;      // size alphabet^k, lexicographic block order
  std::vector<int> symbols;       // optional: generating binned sequence

  std::size_t alphabet_size() const { return midpoints.size(); }
  void validate(double mass_tol = 1e-12, double stat_tol = 1e-10) const;
  // marginal over k-1 positions starting at `offset` (0 = drop last, 1 = drop first)
  std::vector<double> boundary_marginal(int offset) const;
};

// H_k/k in nats for the k-block law, with 0 log 0 = 0.
double block_entropy(const QuantizedProcess& q);

struct PackingBoundResult {
  std::size_t measured = 0;  // greedy delta-packing count in d_{n,inf}
  double bound = 0.0;        // (3K/delta)^{delta n/2} * 2^{H2(delta/2) n}
  bool pass = false;
};

// Checks the l_p-ball packing bound: probes must lie in the d_{n,p} ball of
// radius eps = (delta/2)^{(1+p)/p} around u (else a precondition error), and
// the measured d_{n,inf} delta-packing count must not exceed the bound.
PackingBoundResult packing_bound_check(const RealSequence& u, double delta, double p,
                                       double K, const SequenceSample& probes);

// Base-2 binary entropy H2(x), used by the packing bound.
double binary_entropy2(double x);

// CSV rows "p,n,r,N,M"; JSON includes the slopes.
std::string complexity_report_csv(const ComplexityReport& rep);
std::string complexity_report_json(const ComplexityReport& rep);

}  // namespace ergofit
