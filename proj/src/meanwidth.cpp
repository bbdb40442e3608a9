#include "ergofit/meanwidth.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ergofit/rng.hpp"
#include "nlohmann/json.hpp"

namespace ergofit {

void NoiseModel::validate() const {
  if (kind == Kind::Gaussian && !(sigma > 0.0))
    throw std::invalid_argument("NoiseModel: sigma must be positive");
  if (kind == Kind::Uniform && !(half_width > 0.0))
    throw std::invalid_argument("NoiseModel: half-width must be positive");
}

double NoiseModel::draw(CounterRng& rng) const {
  switch (kind) {
    case Kind::Gaussian:
      return sigma * rng.gaussian();
    case Kind::Uniform:
      return rng.uniform(-half_width, half_width);
    case Kind::Rademacher:
      return rng.rademacher();
  }
  return 0.0;
}

std::string OptimizerConfig::describe() const {
  switch (kind) {
    case Kind::Grid:
      return "grid";
    case Kind::GridRefine:
      return "grid+refine";
    case Kind::TrackingOracle:
      return "tracking-oracle";
  }
  return "?";
}

namespace {

double objective(const ModelFamily& fam, const Theta& th, const State& x0,
                 const RealSequence& eps) {
  State x = x0;
  double acc = 0.0;
  for (double e : eps) {
    acc += fam.observe(th, x) * e;
    fam.step(th, x);
  }
  return acc;
}

// Search axes: the family's theta axes followed by its state coordinates,
// each with a candidate value list and a continuity flag for refinement.
struct SearchAxis {
  std::vector<double> values;
  bool continuous = false;
  double lo = 0.0, hi = 1.0;
  bool wrap = false;
};

std::vector<SearchAxis> build_axes(const ModelFamily& fam, int grid_points) {
  std::vector<SearchAxis> axes;
  for (const Axis& a : fam.params.axes) {
    SearchAxis s;
    if (a.discrete) {
      for (long v = std::llround(a.lo); v <= std::llround(a.hi); ++v)
        s.values.push_back(static_cast<double>(v));
    } else {
      s.continuous = true;
      s.lo = a.lo;
      s.hi = a.hi;
      s.wrap = a.wrap;
      int g = std::max(2, grid_points);
      for (int i = 0; i < g; ++i)
        s.values.push_back(a.wrap ? a.lo + (a.hi - a.lo) * i / g
                                  : a.lo + (a.hi - a.lo) * i / (g - 1));
    }
    axes.push_back(std::move(s));
  }
  for (int d = 0; d < fam.state_dim; ++d) {
    SearchAxis s;
    if (fam.domain == StateDomain::SymbolicShift) {
      for (int i = 0; i < std::max(2, grid_points); ++i)
        s.values.push_back(static_cast<double>(i));
    } else {
      s.continuous = true;
      s.wrap = fam.domain == StateDomain::TorusPower;
      int g = std::max(2, grid_points);
      for (int i = 0; i < g; ++i)
        s.values.push_back(s.wrap ? static_cast<double>(i) / g
                                  : static_cast<double>(i) / (g - 1));
    }
    axes.push_back(std::move(s));
  }
  return axes;
}

struct SearchPoint {
  std::vector<double> coords;  // theta axes then state coordinates
  double value = -std::numeric_limits<double>::infinity();
};

double eval_point(const ModelFamily& fam, const std::vector<double>& coords,
                  const RealSequence& eps) {
  const std::size_t nt = fam.params.axes.size();
  Theta th(coords.begin(), coords.begin() + nt);
  State x(coords.begin() + nt, coords.end());
  return objective(fam, th, x, eps);
}

// Exhaustive sweep of the candidate grid, stopping at the eval budget; any
// attained value is a certified lower bound on the supremum.
SearchPoint grid_sweep(const ModelFamily& fam, const std::vector<SearchAxis>& axes,
                       const RealSequence& eps, std::size_t budget, std::size_t& used,
                       bool& exceeded) {
  std::vector<std::size_t> idx(axes.size(), 0);
  SearchPoint best;
  std::vector<double> coords(axes.size());
  for (;;) {
    if (used >= budget) {
      exceeded = true;
      break;
    }
    for (std::size_t k = 0; k < axes.size(); ++k) coords[k] = axes[k].values[idx[k]];
    double v = eval_point(fam, coords, eps);
    ++used;
    if (v > best.value) {
      best.value = v;
      best.coords = coords;
    }
    std::size_t k = axes.size();
    while (k > 0 && ++idx[k - 1] == axes[k - 1].values.size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return best;
}

// Golden-section ascent on one coordinate over [center-h, center+h]; the
// objective is not unimodal, so this only polishes the grid optimum locally.
void golden_axis(const ModelFamily& fam, const SearchAxis& axis, SearchPoint& pt,
                 std::size_t k, double h, int iters, const RealSequence& eps,
                 std::size_t budget, std::size_t& used, bool& exceeded) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = pt.coords[k] - h, b = pt.coords[k] + h;
  if (!axis.wrap) {
    a = std::max(a, axis.lo);
    b = std::min(b, axis.hi);
  }
  auto probe = [&](double t) {
    std::vector<double> c = pt.coords;
    c[k] = axis.wrap ? axis.lo + std::fmod(t - axis.lo + (axis.hi - axis.lo),
                                           axis.hi - axis.lo)
                     : t;
    ++used;
    double v = eval_point(fam, c, eps);
    if (v > pt.value) {
      pt.value = v;
      pt.coords = std::move(c);
    }
    return v;
  };
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = probe(x1), f2 = probe(x2);
  for (int i = 0; i < iters; ++i) {
    if (used >= budget) {
      exceeded = true;
      return;
    }
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = probe(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = probe(x1);
    }
  }
}

double replicate_max(const ModelFamily& fam, const RealSequence& eps,
                     const OptimizerConfig& opt, bool& exceeded) {
  if (opt.kind == OptimizerConfig::Kind::TrackingOracle)
    return tracked_orbit_logistic4(eps).value;
  auto axes = build_axes(fam, opt.grid_points);
  std::size_t used = 0;
  SearchPoint best = grid_sweep(fam, axes, eps, opt.eval_budget, used, exceeded);
  if (opt.kind == OptimizerConfig::Kind::GridRefine) {
    for (int round = 0; round < opt.refine_rounds && !exceeded; ++round)
      for (std::size_t k = 0; k < axes.size(); ++k) {
        if (!axes[k].continuous) continue;
        double h = (axes[k].hi - axes[k].lo) /
                   static_cast<double>(axes[k].values.size() - 1);
        golden_axis(fam, axes[k], best, k, h, opt.refine_iters, eps, opt.eval_budget,
                    used, exceeded);
      }
  }
  return best.value;
}

}  // namespace

MeanWidthEntry mean_width_n(const ModelFamily& fam, const NoiseModel& noise, int n,
                            int replicates, const OptimizerConfig& opt,
                            std::uint64_t seed) {
  if (n < 1 || replicates < 1)
    throw std::invalid_argument("mean_width_n: n and replicates must be >= 1");
  noise.validate();
  std::vector<double> maxima(replicates);
  bool exceeded = false;
#pragma omp parallel for schedule(dynamic) reduction(|| : exceeded)
  for (int rep = 0; rep < replicates; ++rep) {
    CounterRng rng(CounterRng::derive_key(seed, "mean_width",
                                          static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(rep)));
    RealSequence eps(n);
    for (double& e : eps) e = noise.draw(rng);
    bool over = false;
    maxima[rep] = replicate_max(fam, eps, opt, over);
    exceeded = exceeded || over;
  }
  double mean = 0.0;
  for (double m : maxima) mean += m;
  mean /= replicates;
  double var = 0.0;
  for (double m : maxima) var += (m - mean) * (m - mean);
  var = replicates > 1 ? var / (replicates - 1) : 0.0;
  MeanWidthEntry e;
  e.n = n;
  e.kappa_over_n = mean / n;
  e.stderr_ = std::sqrt(var / replicates) / n;
  e.replicates = replicates;
  e.optimizer = opt.describe();
  e.budget_exceeded = exceeded;
  return e;
}

MeanWidthReport mean_width_profile(const ModelFamily& fam, const NoiseModel& noise,
                                   const std::vector<int>& horizons, int replicates,
                                   const OptimizerConfig& opt, std::uint64_t seed) {
  MeanWidthReport rep;
  rep.family_id = fam.id;
  rep.noise = noise;
  for (int n : horizons) rep.entries.push_back(mean_width_n(fam, noise, n, replicates, opt, seed));
  return rep;
}

bool MeanWidthReport::subadditive_within(double slack) const {
  for (const auto& em : entries)
    for (const auto& en : entries) {
      auto it = std::find_if(entries.begin(), entries.end(),
                             [&](const MeanWidthEntry& e) { return e.n == em.n + en.n; });
      if (it == entries.end()) continue;
      double lhs = it->kappa_over_n * it->n;
      double rhs = em.kappa_over_n * em.n + en.kappa_over_n * en.n;
      double tol = slack * (it->stderr_ * it->n + em.stderr_ * em.n + en.stderr_ * en.n);
      if (lhs > rhs + tol) return false;
    }
  return true;
}

namespace {

// Backward pass through the inverse branches in extended precision; emits the
// orbit coordinate-by-coordinate so the doubles are the exact orbit of x0 up
// to 2^(n - prec), far below double resolution.
TrackingResult tracked_orbit_impl(const RealSequence& eps) {
  const int n = static_cast<int>(eps.size());
  if (n == 0) throw std::invalid_argument("tracking oracle: empty noise sequence");
  const mpfr_prec_t prec = n + 128;
  mpfr_t w, s;
  mpfr_init2(w, prec);
  mpfr_init2(s, prec);
  mpfr_set_d(w, eps[n - 1] > 0.0 ? 0.75 : 0.25, MPFR_RNDN);
  TrackingResult out;
  out.orbit.assign(n, 0.0);
  out.orbit[n - 1] = mpfr_get_d(w, MPFR_RNDN);
  for (int k = n - 2; k >= 0; --k) {
    // w <- (1 +- sqrt(1 - w)) / 2, the branch landing in the target half
    mpfr_ui_sub(s, 1, w, MPFR_RNDN);
    mpfr_sqrt(s, s, MPFR_RNDN);
    if (eps[k] > 0.0)
      mpfr_add_ui(w, s, 1, MPFR_RNDN);
    else
      mpfr_ui_sub(w, 1, s, MPFR_RNDN);
    mpfr_div_ui(w, w, 2, MPFR_RNDN);
    out.orbit[k] = mpfr_get_d(w, MPFR_RNDN);
  }
  out.x0 = out.orbit[0];
  mpfr_clear(w);
  mpfr_clear(s);
  for (int k = 0; k < n; ++k) out.value += out.orbit[k] * eps[k];
  return out;
}

}  // namespace

TrackingResult tracked_orbit_logistic4(const RealSequence& eps) {
  return tracked_orbit_impl(eps);
}

TrackingResult tracking_oracle_logistic4(const RealSequence& eps) {
  if (eps.size() > 40)
    throw std::domain_error(
        "tracking_oracle_logistic4: n > 40 exceeds the double-precision depth guard");
  return tracked_orbit_impl(eps);
}

double sigma0(double bound_K, double kappa_G_hat) {
  if (!(kappa_G_hat > 0.0))
    throw std::invalid_argument("sigma0: kappa_G must be positive");
  return bound_K * bound_K / (2.0 * kappa_G_hat);
}

std::vector<SudakovCell> sudakov_check(const ComplexityReport& complexity,
                                       const MeanWidthReport& width) {
  if (complexity.family_id != width.family_id)
    throw std::invalid_argument("sudakov_check: mismatched family ids");
  if (complexity.p != 2.0)
    throw std::invalid_argument("sudakov_check: complexity report must use p=2");
  std::vector<SudakovCell> cells;
  for (const auto& e : width.entries) {
    auto it = std::find(complexity.horizons.begin(), complexity.horizons.end(), e.n);
    if (it == complexity.horizons.end()) continue;
    std::size_t hi = static_cast<std::size_t>(it - complexity.horizons.begin());
    for (std::size_t ri = 0; ri < complexity.radii.size(); ++ri) {
      std::size_t N = complexity.cover_counts[hi][ri];
      if (N == ComplexityReport::kRefusedCell) continue;
      SudakovCell c;
      c.n = e.n;
      c.delta = complexity.radii[ri];
      c.lhs = e.kappa_over_n + 3.0 * e.stderr_;
      c.rhs = (c.delta / 6.0) * std::sqrt(std::log(static_cast<double>(N)) / e.n);
      c.margin = c.lhs - c.rhs;
      c.pass = c.lhs >= c.rhs;
      cells.push_back(c);
    }
  }
  return cells;
}

std::string mean_width_report_csv(const MeanWidthReport& rep) {
  std::ostringstream os;
  os << "n,kappa_over_n,stderr,replicates,optimizer\n";
  for (const auto& e : rep.entries)
    os << e.n << ',' << e.kappa_over_n << ',' << e.stderr_ << ',' << e.replicates << ','
       << e.optimizer << '\n';
  return os.str();
}

std::string mean_width_report_json(const MeanWidthReport& rep) {
  nlohmann::json j;
  j["family_id"] = rep.family_id;
  switch (rep.noise.kind) {
    case NoiseModel::Kind::Gaussian:
      j["noise"] = {{"kind", "gaussian"}, {"sigma", rep.noise.sigma}};
      break;
    case NoiseModel::Kind::Uniform:
      j["noise"] = {{"kind", "uniform"}, {"half_width", rep.noise.half_width}};
      break;
    case NoiseModel::Kind::Rademacher:
      j["noise"] = {{"kind", "rademacher"}};
      break;
  }
  j["entries"] = nlohmann::json::array();
  for (const auto& e : rep.entries)
    j["entries"].push_back({{"n", e.n},
                            {"kappa_over_n", e.kappa_over_n},
                            {"stderr", e.stderr_},
                            {"replicates", e.replicates},
                            {"optimizer", e.optimizer},
                            {"budget_exceeded", e.budget_exceeded}});
  return j.dump(2);
}

}  // namespace ergofit
