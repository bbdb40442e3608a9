#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ergofit {

using State = std::vector<double>;
using Theta = std::vector<double>;  // discrete axes hold integer-valued entries

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool wrap = false;      // torus axis: identify lo with hi (distance mod 1)
  bool discrete = false;  // finite label axis: values lo, lo+1, ..., hi
  int grid_n = 2;         // per-axis point count for exhaustive sweeps
};

// Compact parameter space: product of closed bounded intervals, wrap flags for
// torus axes, and integer-labelled finite axes.
struct ParameterSpace {
  std::vector<Axis> axes;

  bool contains(const Theta& theta, double tol = 1e-12) const;
  void validate() const;  // throws std::invalid_argument on an empty/unbounded axis
};

enum class StateDomain { UnitIntervalPower, TorusPower, SymbolicShift };

// A parametrized family of dynamical models: a step map T_theta on the state
// domain and a bounded observation f_theta, both continuous in (theta, x) on
// continuous domains. Immutable after construction; step/observe are pure.
struct ModelFamily {
  std::string id;
  ParameterSpace params;
  int state_dim = 1;
  StateDomain domain = StateDomain::UnitIntervalPower;
  double bound_K = 1.0;  // uniform bound on |observe|

  std::function<void(const Theta&, State&)> step;          // x <- T_theta(x)
  std::function<double(const Theta&, const State&)> observe;

  bool state_in_domain(const State& x, double tol = 0.0) const;
};

struct ObservationEntry {
  std::function<double(const State&)> f;
  double sup_norm;  // caller-supplied bound on |f|
};

// T_a(x) = a x (1-x) on [0,1], observe = identity. Requires [a_lo,a_hi] in [0,4].
ModelFamily make_logistic(double a_lo, double a_hi);

// Rotation of the d-torus by an angle vector, with a finite observation
// dictionary as an extra discrete parameter axis.
ModelFamily make_rotation(int d, std::vector<ObservationEntry> dictionary);

// Two-element family on [0,1]: theta=0 the identity map, theta=1 the fully
// chaotic logistic map 4x(1-x); observe = identity for both.
ModelFamily make_identity_vs_chaos();

// Substitution subshift: state is a position into the substitution fixed point,
// step is the one-sided shift, observe maps the current symbol through
// value_map. Rules must be primitive and expanding.
ModelFamily make_substitution(const std::map<int, std::vector<int>>& rules,
                              const std::vector<int>& alphabet,
                              const std::map<int, double>& value_map);

// Convenience: Thue-Morse (0 -> 01, 1 -> 10) with value_map {0->0, 1->1}.
ModelFamily make_thue_morse();
// Fibonacci substitution (0 -> 01, 1 -> 0).
ModelFamily make_fibonacci();

}  // namespace ergofit
