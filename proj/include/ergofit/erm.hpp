#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergofit/dynamics.hpp"
#include "ergofit/meanwidth.hpp"

namespace ergofit {

struct LossSpec {
  enum class Kind { Squared, Absolute, Bregman };
  Kind kind = Kind::Squared;
  // Bregman potential F as polynomial coefficients (constant term first);
  // the divergence is l(u,v) = F(v) - F(u) - (v-u) F'(u).
  std::vector<double> potential;

  double operator()(double u, double v) const;
  // Checks F'' >= 0 on [lo, hi] by dense sampling; throws on violation.
  void validate(double lo = -11.0, double hi = 11.0) const;
};

// Observed time series, optionally carrying the recipe that generated it:
// y_k = signal_k + eps_k with eps drawn from a counter-based stream keyed by
// (seed, label), so y regenerates bit-exactly.
struct ObservedSeries {
  RealSequence y;

  struct Provenance {
    RealSequence signal;
    NoiseModel noise;
    std::uint64_t seed = 0;
    std::string label = "observed";
  };
  std::optional<Provenance> provenance;

  static ObservedSeries generate(RealSequence signal, const NoiseModel& noise,
                                 std::uint64_t seed, std::string label = "observed");
  bool provenance_consistent() const;  // true when absent or bit-exact
};

struct FitConfig {
  int x_grid_points = 33;       // per state coordinate (symbolic: positions 0..g-1)
  int theta_grid_override = 0;  // 0 = use each axis's own grid_n
  int refine_sweeps = 2;        // coordinate-descent sweeps over continuous axes
  double refine_tol = 1e-6;     // golden-section stop, fraction of axis length
  std::size_t eval_budget = std::size_t{1} << 32;  // loss-term evaluations
};

struct FitResult {
  Theta theta;
  State x;
  double risk = 0.0;

  struct TracePoint {
    int n = 0;
    Theta theta;
    State x;
    double risk = 0.0;
    double running_min_risk = 0.0;
  };
  std::vector<TracePoint> trace;  // filled by estimator_sequence

  struct Diagnostics {
    std::size_t grid_candidates = 0;
    std::size_t evals = 0;
    int refine_sweeps = 0;
    bool budget_exceeded = false;
    bool heavy_tailed_losses = false;  // empirical kurtosis > 100 at the optimum
  };
  Diagnostics diagnostics;
};

// n^-1 sum_k l(f_theta(T_theta^k x), y_k). Throws std::domain_error when
// (theta, x) violate the family's domains.
double empirical_risk(const ModelFamily& fam, const Theta& theta, const State& x,
                      const ObservedSeries& y, const LossSpec& loss);

// Approximate joint minimizer over (theta, x): exhaustive coarse grid, then
// golden-section coordinate refinement on continuous axes. Deterministic for
// any thread count; exact risk ties break to the lexicographically smallest
// theta, then smallest x, in grid order.
FitResult fit(const ModelFamily& fam, const ObservedSeries& y, const LossSpec& loss,
              const FitConfig& cfg, std::uint64_t seed);

// fit on each prefix y[0..n) for n in horizons, reusing orbit prefixes across
// horizons; trace records each prefix optimum and the running minimum risk.
FitResult estimator_sequence(const ModelFamily& fam, const ObservedSeries& y,
                             const LossSpec& loss, const std::vector<int>& horizons,
                             const FitConfig& cfg, std::uint64_t seed);

// The noise-smoothed loss L(u,v) = E l(u, v + eps0). Squared loss uses the
// closed form (u-v)^2 + Var(eps); other losses average over mc_samples
// pre-drawn noise values and report a standard error.
class AuxiliaryLoss {
 public:
  AuxiliaryLoss(LossSpec loss, NoiseModel noise, int mc_samples, std::uint64_t seed);

  struct Value {
    double value = 0.0;
    double stderr_ = 0.0;  // zero for closed forms
  };
  Value operator()(double u, double v) const;
  bool closed_form() const { return closed_form_; }

 private:
  LossSpec loss_;
  NoiseModel noise_;
  bool closed_form_ = false;
  std::vector<double> draws_;
};

std::string fit_result_json(const FitResult& r);
std::string trace_csv(const FitResult& r);

}  // namespace ergofit
