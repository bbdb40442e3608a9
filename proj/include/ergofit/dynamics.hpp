#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ergofit/families.hpp"

namespace ergofit {

using RealSequence = std::vector<double>;

inline constexpr double kPInf = std::numeric_limits<double>::infinity();

// (f(x), f(Tx), ..., f(T^{n-1}x)). Throws std::domain_error if theta is
// outside the parameter space or x0 outside the state domain.
RealSequence orbit(const ModelFamily& fam, const Theta& theta, const State& x0, int n);

// Finite sample of the family's sequence set: one length-n sequence per
// (theta, x0) grid pair, stored contiguously in grid order (theta outer).
struct SequenceSample {
  std::string family_id;
  int n = 0;
  std::vector<Theta> theta_grid;
  std::vector<State> x_grid;
  std::vector<double> values;  // size() == entry_count() * n, row-major

  std::size_t entry_count() const { return theta_grid.size() * x_grid.size(); }
  std::span<const double> seq(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
  const Theta& entry_theta(std::size_t i) const { return theta_grid[i / x_grid.size()]; }
  const State& entry_x0(std::size_t i) const { return x_grid[i % x_grid.size()]; }
};

// Materializes orbits for every grid pair; parallel over entries, output
// ordering fixed by grid order regardless of thread count.
SequenceSample sample_sequences(const ModelFamily& fam, const std::vector<Theta>& theta_grid,
                                const std::vector<State>& x_grid, int n);

// d_{n,p}(u,v) = (n^-1 sum |u_k - v_k|^p)^{1/p}, or max |u_k - v_k| for p = inf.
double pseudo_metric(std::span<const double> u, std::span<const double> v, double p);

// d_{n,p} restricted to the first n coordinates, with early exit once the
// distance is known to exceed `cutoff` (returns something > cutoff then).
double pseudo_metric_above(std::span<const double> u, std::span<const double> v, double p,
                           double cutoff);

}  // namespace ergofit
