#include "ergofit/erm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ergofit/rng.hpp"
#include "nlohmann/json.hpp"

namespace ergofit {
namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

std::vector<double> poly_deriv(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
  return d;
}

}  // namespace

double LossSpec::operator()(double u, double v) const {
  switch (kind) {
    case Kind::Squared:
      return (u - v) * (u - v);
    case Kind::Absolute:
      return std::abs(u - v);
    case Kind::Bregman: {
      // D_F: F(v) - F(u) - (v-u) F'(u); nonnegative for convex F
      double fu = poly_eval(potential, u), fv = poly_eval(potential, v);
      return fv - fu - (v - u) * poly_eval(poly_deriv(potential), u);
    }
  }
  return 0.0;
}

void LossSpec::validate(double lo, double hi) const {
  if (kind != Kind::Bregman) return;
  auto f2 = poly_deriv(poly_deriv(potential));
  const int samples = 2001;
  for (int i = 0; i < samples; ++i) {
    double x = lo + (hi - lo) * i / (samples - 1);
    if (poly_eval(f2, x) < -1e-12)
      throw std::invalid_argument("LossSpec: Bregman potential not convex on data range");
  }
}

ObservedSeries ObservedSeries::generate(RealSequence signal, const NoiseModel& noise,
                                        std::uint64_t seed, std::string label) {
  noise.validate();
  ObservedSeries out;
  CounterRng rng(CounterRng::derive_key(seed, label));
  out.y.resize(signal.size());
  for (std::size_t k = 0; k < signal.size(); ++k) out.y[k] = signal[k] + noise.draw(rng);
  out.provenance = Provenance{std::move(signal), noise, seed, std::move(label)};
  return out;
}

bool ObservedSeries::provenance_consistent() const {
  if (!provenance) return true;
  const auto& p = *provenance;
  if (p.signal.size() != y.size()) return false;
  CounterRng rng(CounterRng::derive_key(p.seed, p.label));
  for (std::size_t k = 0; k < y.size(); ++k)
    if (y[k] != p.signal[k] + p.noise.draw(rng)) return false;
  return true;
}

double empirical_risk(const ModelFamily& fam, const Theta& theta, const State& x,
                      const ObservedSeries& y, const LossSpec& loss) {
  if (y.y.empty()) throw std::invalid_argument("empirical_risk: empty series");
  RealSequence u = orbit(fam, theta, x, static_cast<int>(y.y.size()));
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += loss(u[k], y.y[k]);
  return acc / static_cast<double>(u.size());
}

namespace {

std::vector<std::vector<double>> theta_axis_values(const ModelFamily& fam, int override_n) {
  std::vector<std::vector<double>> out;
  for (const Axis& a : fam.params.axes) {
    std::vector<double> vals;
    if (a.discrete) {
      for (long v = std::llround(a.lo); v <= std::llround(a.hi); ++v)
        vals.push_back(static_cast<double>(v));
    } else {
      int g = override_n > 0 ? override_n : a.grid_n;
      g = std::max(2, g);
      for (int i = 0; i < g; ++i)
        vals.push_back(a.wrap ? a.lo + (a.hi - a.lo) * i / g
                              : a.lo + (a.hi - a.lo) * i / (g - 1));
    }
    out.push_back(std::move(vals));
  }
  return out;
}

std::vector<std::vector<double>> x_axis_values(const ModelFamily& fam, int g) {
  g = std::max(2, g);
  std::vector<std::vector<double>> out;
  for (int d = 0; d < fam.state_dim; ++d) {
    std::vector<double> vals;
    if (fam.domain == StateDomain::SymbolicShift)
      for (int i = 0; i < g; ++i) vals.push_back(static_cast<double>(i));
    else if (fam.domain == StateDomain::TorusPower)
      for (int i = 0; i < g; ++i) vals.push_back(static_cast<double>(i) / g);
    else
      for (int i = 0; i < g; ++i) vals.push_back(static_cast<double>(i) / (g - 1));
    out.push_back(std::move(vals));
  }
  return out;
}

std::vector<std::vector<double>> product(const std::vector<std::vector<double>>& axes) {
  std::vector<std::vector<double>> out{{}};
  for (const auto& vals : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(out.size() * vals.size());
    for (const auto& prefix : out)
      for (double v : vals) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

struct CellBest {
  double risk = std::numeric_limits<double>::infinity();
  std::uint32_t x_idx = 0;
};

struct SweepOut {
  // per horizon: grid optimum
  std::vector<Theta> theta;
  std::vector<State> x;
  std::vector<double> risk;
  FitResult::Diagnostics diagnostics;
};

// Exhaustive grid sweep with orbit-prefix reuse: one pass over each (theta, x)
// candidate accumulates the loss sum and snapshots the risk at every horizon.
// Parallel over theta cells; the reduction scans cells in grid order, so ties
// break to the lexicographically smallest theta, then smallest x, for any
// thread count.
SweepOut grid_sweep(const ModelFamily& fam, const ObservedSeries& y, const LossSpec& loss,
                    const std::vector<int>& horizons, const FitConfig& cfg) {
  const auto thetas = product(theta_axis_values(fam, cfg.theta_grid_override));
  const auto xs = product(x_axis_values(fam, cfg.x_grid_points));
  const std::size_t T = thetas.size(), X = xs.size(), H = horizons.size();
  const int nmax = horizons.back();

  const std::size_t total = T * X;
  std::size_t allowed = cfg.eval_budget / static_cast<std::size_t>(nmax);
  const bool exceeded = allowed < total;
  if (!exceeded) allowed = total;

  std::vector<std::vector<CellBest>> bests(T, std::vector<CellBest>(H));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < T; ++t) {
    if (t * X >= allowed) continue;
    const std::size_t xlim = std::min(X, allowed - t * X);
    const Theta& th = thetas[t];
    auto& row = bests[t];
    State x;
    for (std::size_t xi = 0; xi < xlim; ++xi) {
      x = xs[xi];
      double acc = 0.0;
      std::size_t hidx = 0;
      for (int k = 0; k < nmax; ++k) {
        acc += loss(fam.observe(th, x), y.y[k]);
        fam.step(th, x);
        if (k + 1 == horizons[hidx]) {
          double r = acc / (k + 1);
          if (r < row[hidx].risk) {
            row[hidx].risk = r;
            row[hidx].x_idx = static_cast<std::uint32_t>(xi);
          }
          ++hidx;
        }
      }
    }
  }

  SweepOut out;
  out.theta.resize(H);
  out.x.resize(H);
  out.risk.assign(H, std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t h = 0; h < H; ++h)
      if (bests[t][h].risk < out.risk[h]) {
        out.risk[h] = bests[t][h].risk;
        out.theta[h] = thetas[t];
        out.x[h] = xs[bests[t][h].x_idx];
      }
  out.diagnostics.grid_candidates = total;
  out.diagnostics.evals = allowed * static_cast<std::size_t>(nmax);
  out.diagnostics.budget_exceeded = exceeded;
  return out;
}

double prefix_risk(const ModelFamily& fam, const Theta& th, const State& x0,
                   const ObservedSeries& y, const LossSpec& loss, int n) {
  State x = x0;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += loss(fam.observe(th, x), y.y[k]);
    fam.step(th, x);
  }
  return acc / n;
}

// Golden-section coordinate descent on the continuous axes around the grid
// optimum; only strict improvements are kept, preserving the tie-break order.
void refine(const ModelFamily& fam, const ObservedSeries& y, const LossSpec& loss, int n,
            const FitConfig& cfg, Theta& th, State& x, double& risk) {
  constexpr double kInvPhi = 0.6180339887498949;
  struct Cont {
    bool is_theta;
    std::size_t idx;
    double lo, hi;
    bool wrap;
    double h;  // initial half-width: one grid spacing
  };
  std::vector<Cont> axes;
  for (std::size_t i = 0; i < fam.params.axes.size(); ++i) {
    const Axis& a = fam.params.axes[i];
    if (a.discrete) continue;
    int g = std::max(2, cfg.theta_grid_override > 0 ? cfg.theta_grid_override : a.grid_n);
    axes.push_back({true, i, a.lo, a.hi, a.wrap, (a.hi - a.lo) / (g - 1)});
  }
  if (fam.domain != StateDomain::SymbolicShift)
    for (int d = 0; d < fam.state_dim; ++d)
      axes.push_back({false, static_cast<std::size_t>(d), 0.0, 1.0,
                      fam.domain == StateDomain::TorusPower,
                      1.0 / (std::max(2, cfg.x_grid_points) - 1)});

  for (int sweep = 0; sweep < cfg.refine_sweeps; ++sweep)
    for (const Cont& c : axes) {
      double center = c.is_theta ? th[c.idx] : x[c.idx];
      double a = center - c.h, b = center + c.h;
      if (!c.wrap) {
        a = std::max(a, c.lo);
        b = std::min(b, c.hi);
      }
      auto eval_at = [&](double t) {
        double v = c.wrap ? c.lo + std::fmod(t - c.lo + (c.hi - c.lo), c.hi - c.lo) : t;
        Theta th2 = th;
        State x2 = x;
        (c.is_theta ? th2[c.idx] : x2[c.idx]) = v;
        double r = prefix_risk(fam, th2, x2, y, loss, n);
        if (r < risk) {
          risk = r;
          th = th2;
          x = x2;
        }
        return r;
      };
      double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
      double f1 = eval_at(x1), f2 = eval_at(x2);
      for (int it = 0; it < 60 && (b - a) > cfg.refine_tol * (c.hi - c.lo); ++it) {
        if (f1 > f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + kInvPhi * (b - a);
          f2 = eval_at(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - kInvPhi * (b - a);
          f1 = eval_at(x1);
        }
      }
    }
}

bool heavy_tailed(const ModelFamily& fam, const Theta& th, const State& x0,
                  const ObservedSeries& y, const LossSpec& loss, int n) {
  State x = x0;
  std::vector<double> l(n);
  for (int k = 0; k < n; ++k) {
    l[k] = loss(fam.observe(th, x), y.y[k]);
    fam.step(th, x);
  }
  double mean = 0.0;
  for (double v : l) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : l) {
    double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  return m2 > 0.0 && m4 / (m2 * m2) > 100.0;
}

}  // namespace

FitResult estimator_sequence(const ModelFamily& fam, const ObservedSeries& y,
                             const LossSpec& loss, const std::vector<int>& horizons,
                             const FitConfig& cfg, std::uint64_t /*seed*/) {
  if (horizons.empty()) throw std::invalid_argument("estimator_sequence: no horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1 || (i > 0 && horizons[i] <= horizons[i - 1]))
      throw std::invalid_argument("estimator_sequence: horizons must be increasing");
  }
  if (static_cast<std::size_t>(horizons.back()) > y.y.size())
    throw std::invalid_argument("estimator_sequence: horizon exceeds series length");
  loss.validate();

  SweepOut sw = grid_sweep(fam, y, loss, horizons, cfg);
  FitResult out;
  out.diagnostics = sw.diagnostics;
  out.diagnostics.refine_sweeps = cfg.refine_sweeps;
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    Theta th = sw.theta[h];
    State x = sw.x[h];
    double risk = sw.risk[h];
    refine(fam, y, loss, horizons[h], cfg, th, x, risk);
    running = std::min(running, risk);
    out.trace.push_back({horizons[h], th, x, risk, running});
  }
  const auto& last = out.trace.back();
  out.theta = last.theta;
  out.x = last.x;
  out.risk = last.risk;
  out.diagnostics.heavy_tailed_losses =
      heavy_tailed(fam, out.theta, out.x, y, loss, horizons.back());
  return out;
}

FitResult fit(const ModelFamily& fam, const ObservedSeries& y, const LossSpec& loss,
              const FitConfig& cfg, std::uint64_t seed) {
  if (y.y.empty()) throw std::invalid_argument("fit: empty series");
  FitResult r = estimator_sequence(fam, y, loss, {static_cast<int>(y.y.size())}, cfg, seed);
  r.trace.clear();
  return r;
}

AuxiliaryLoss::AuxiliaryLoss(LossSpec loss, NoiseModel noise, int mc_samples,
                             std::uint64_t seed)
    : loss_(std::move(loss)), noise_(noise) {
  noise_.validate();
  loss_.validate();
  closed_form_ = loss_.kind == LossSpec::Kind::Squared;
  if (!closed_form_) {
    if (mc_samples < 2) throw std::invalid_argument("AuxiliaryLoss: mc_samples >= 2");
    CounterRng rng(CounterRng::derive_key(seed, "aux_loss"));
    draws_.resize(mc_samples);
    for (double& d : draws_) d = noise_.draw(rng);
  }
}

AuxiliaryLoss::Value AuxiliaryLoss::operator()(double u, double v) const {
  if (closed_form_) {
    double var = 0.0;
    switch (noise_.kind) {
      case NoiseModel::Kind::Gaussian:
        var = noise_.sigma * noise_.sigma;
        break;
      case NoiseModel::Kind::Uniform:
        var = noise_.half_width * noise_.half_width / 3.0;
        break;
      case NoiseModel::Kind::Rademacher:
        var = 1.0;
        break;
    }
    return {(u - v) * (u - v) + var, 0.0};
  }
  double mean = 0.0;
  for (double e : draws_) mean += loss_(u, v + e);
  mean /= static_cast<double>(draws_.size());
  double var = 0.0;
  for (double e : draws_) {
    double d = loss_(u, v + e) - mean;
    var += d * d;
  }
  var /= static_cast<double>(draws_.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(draws_.size()))};
}

std::string fit_result_json(const FitResult& r) {
  nlohmann::json j;
  j["theta"] = r.theta;
  j["x"] = r.x;
  j["risk"] = r.risk;
  j["diagnostics"] = {{"grid_candidates", r.diagnostics.grid_candidates},
                      {"evals", r.diagnostics.evals},
                      {"refine_sweeps", r.diagnostics.refine_sweeps},
                      {"budget_exceeded", r.diagnostics.budget_exceeded},
                      {"heavy_tailed_losses", r.diagnostics.heavy_tailed_losses}};
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& t : r.trace)
    tr.push_back({{"n", t.n},
                  {"theta", t.theta},
                  {"x", t.x},
                  {"risk", t.risk},
                  {"running_min_risk", t.running_min_risk}});
  j["trace"] = tr;
  return j.dump(2);
}

std::string trace_csv(const FitResult& r) {
  std::ostringstream os;
  os << "n";
  for (std::size_t i = 0; i < r.theta.size(); ++i) os << ",theta_" << i;
  os << ",risk,running_min_risk\n";
  for (const auto& t : r.trace) {
    os << t.n;
    for (double v : t.theta) os << ',' << v;
    os << ',' << t.risk << ',' << t.running_min_risk << '\n';
  }
  return os.str();
}

}  // namespace ergofit
