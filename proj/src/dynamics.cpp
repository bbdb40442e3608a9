#include "ergofit/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace ergofit {

RealSequence orbit(const ModelFamily& fam, const Theta& theta, const State& x0, int n) {
  if (n < 1) throw std::invalid_argument("orbit length must be >= 1");
  if (!fam.params.contains(theta)) throw std::domain_error("theta outside parameter space");
  if (!fam.state_in_domain(x0)) throw std::domain_error("x0 outside state domain");
  RealSequence out(static_cast<std::size_t>(n));
  State x = x0;
  for (int k = 0; k < n; ++k) {
    out[k] = fam.observe(theta, x);
    if (k + 1 < n) fam.step(theta, x);
  }
  return out;
}

SequenceSample sample_sequences(const ModelFamily& fam, const std::vector<Theta>& theta_grid,
                                const std::vector<State>& x_grid, int n) {
  if (theta_grid.empty() || x_grid.empty())
    throw std::invalid_argument("sample_sequences: empty grid");
  if (n < 1) throw std::invalid_argument("sample_sequences: n must be >= 1");
  SequenceSample s;
  s.family_id = fam.id;
  s.n = n;
  s.theta_grid = theta_grid;
  s.x_grid = x_grid;
  const std::size_t count = s.entry_count();
  s.values.resize(count * static_cast<std::size_t>(n));
  const std::size_t nx = x_grid.size();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    const Theta& th = theta_grid[static_cast<std::size_t>(i) / nx];
    State x = x_grid[static_cast<std::size_t>(i) % nx];
    double* row = s.values.data() + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < n; ++k) {
      row[k] = fam.observe(th, x);
      if (k + 1 < n) fam.step(th, x);
    }
  }
  return s;
}

double pseudo_metric(std::span<const double> u, std::span<const double> v, double p) {
  if (u.size() != v.size()) throw std::invalid_argument("pseudo_metric: length mismatch");
  if (!(p >= 1.0)) throw std::invalid_argument("pseudo_metric: p must be >= 1");
  const std::size_t n = u.size();
  if (p == kPInf) {
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(u[k] - v[k]));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < n; ++k) {
      double d = u[k] - v[k];
      acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
  }
  if (p == 1.0) {
    for (std::size_t k = 0; k < n; ++k) acc += std::abs(u[k] - v[k]);
    return acc / static_cast<double>(n);
  }
  for (std::size_t k = 0; k < n; ++k) acc += std::pow(std::abs(u[k] - v[k]), p);
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

double pseudo_metric_above(std::span<const double> u, std::span<const double> v, double p,
                           double cutoff) {
  const std::size_t n = u.size();
  if (p == kPInf) {
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double d = std::abs(u[k] - v[k]);
      if (d > m) {
        m = d;
        if (m > cutoff) return m;
      }
    }
    return m;
  }
  // accumulate sum |.|^p against the threshold cutoff^p * n
  const double lim = std::pow(cutoff, p) * static_cast<double>(n);
  double acc = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < n; ++k) {
      double d = u[k] - v[k];
      acc += d * d;
      if (acc > lim) return std::sqrt(acc / static_cast<double>(n));
    }
    return std::sqrt(acc / static_cast<double>(n));
  }
  for (std::size_t k = 0; k < n; ++k) {
    acc += (p == 1.0) ? std::abs(u[k] - v[k]) : std::pow(std::abs(u[k] - v[k]), p);
    if (acc > lim) break;
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

}  // namespace ergofit
