#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergofit/complexity.hpp"
#include "ergofit/dynamics.hpp"

namespace ergofit {

struct NoiseModel {
  enum class Kind { Gaussian, Uniform, Rademacher };
  Kind kind = Kind::Gaussian;
  double sigma = 1.0;       // Gaussian std deviation
  double half_width = 1.0;  // Uniform[-a, a]

  void validate() const;  // mean zero by construction; throws on sigma, a <= 0
  double draw(class CounterRng& rng) const;
};

struct OptimizerConfig {
  enum class Kind { Grid, GridRefine, TrackingOracle };
  Kind kind = Kind::GridRefine;
  int grid_points = 33;       // per continuous axis
  int refine_rounds = 2;      // coordinate-descent sweeps of golden section
  int refine_iters = 24;      // golden-section iterations per axis
  std::size_t eval_budget = 1u << 22;  // orbit evaluations per replicate

  std::string describe() const;
};

struct MeanWidthEntry {
  int n = 0;
  double kappa_over_n = 0.0;
  double stderr_ = 0.0;
  int replicates = 0;
  std::string optimizer;
  bool budget_exceeded = false;  // partial search: still a valid lower bound
};

struct MeanWidthReport {
  std::string family_id;
  NoiseModel noise;
  std::vector<MeanWidthEntry> entries;

  // kappa_{m+n} <= kappa_m + kappa_n within `slack` standard errors, checked
  // on every pair of horizons whose sum is also a computed horizon.
  bool subadditive_within(double slack = 3.0) const;
};

// Monte Carlo estimate of kappa_n/n: per replicate, draw n noise values and
// maximize sum_k f_theta(T_theta^k x) eps_k over the (theta, x) search grid
// with local refinement on continuous axes. Deterministic given seed; each
// replicate owns a counter-based stream, so the result is thread-count
// independent.
MeanWidthEntry mean_width_n(const ModelFamily& fam, const NoiseModel& noise, int n,
                            int replicates, const OptimizerConfig& opt, std::uint64_t seed);

MeanWidthReport mean_width_profile(const ModelFamily& fam, const NoiseModel& noise,
                                   const std::vector<int>& horizons, int replicates,
                                   const OptimizerConfig& opt, std::uint64_t seed);

struct TrackingResult {
  double x0 = 0.0;
  double value = 0.0;   // sum_k u_k eps_k
  RealSequence orbit;   // u_k = T^k(x0), each in the half selected by sign(eps_k)
};

// Noise-tracking construction for T(x) = 4x(1-x): pick the upper half of
// [0,1] when eps_k > 0 and the lower half otherwise, then recover x0 by
// backward iteration through the inverse branches g-+(w) = (1 -+ sqrt(1-w))/2
// from the midpoint of the final half. Double precision; throws
// std::domain_error for n > 40 (forward-replay guarantee expires there).
TrackingResult tracking_oracle_logistic4(const RealSequence& eps);

// Same construction at arbitrary depth: the backward pass runs in extended
// precision (n + 96 bits) so the emitted doubles are the true orbit of x0 to
// well below double resolution at every coordinate.
TrackingResult tracked_orbit_logistic4(const RealSequence& eps);

// sigma_0 = K^2 / (2 kappa_G); threshold above which least squares goes
// inconsistent. Throws std::invalid_argument for kappa_G <= 0.
double sigma0(double bound_K, double kappa_G_hat);

struct SudakovCell {
  int n = 0;
  double delta = 0.0;
  double lhs = 0.0;  // kappa_n/n + 3 stderr
  double rhs = 0.0;  // (delta/6) sqrt(log N(delta, d_{n,2}) / n)
  double margin = 0.0;
  bool pass = false;
};

// Cross-check of Sudakov's lower bound on matched (family, horizon) cells;
// requires a p=2 complexity report and a Gaussian sigma=1 width report.
std::vector<SudakovCell> sudakov_check(const ComplexityReport& complexity,
                                       const MeanWidthReport& width);

std::string mean_width_report_csv(const MeanWidthReport& rep);
std::string mean_width_report_json(const MeanWidthReport& rep);

}  // namespace ergofit
