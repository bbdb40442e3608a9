#include "ergofit/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ergofit/rng.hpp"
#include "ergofit/simplex.hpp"
#include "nlohmann/json.hpp"

namespace ergofit {
namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

std::vector<double> bin_midpoints(const std::vector<double>& cuts) {
  // interior bins use interval midpoints; the unbounded edge bins sit half a
  // neighbor-width outside the nearest cut
  double w0 = cuts.size() >= 2 ? cuts[1] - cuts.front() : 1.0;
  double w1 = cuts.size() >= 2 ? cuts.back() - cuts[cuts.size() - 2] : 1.0;
  std::vector<double> mids;
  mids.push_back(cuts.front() - w0 / 2.0);
  for (std::size_t i = 1; i < cuts.size(); ++i) mids.push_back((cuts[i - 1] + cuts[i]) / 2.0);
  mids.push_back(cuts.back() + w1 / 2.0);
  return mids;
}

}  // namespace

QuantizedProcess quantize(const RealSequence& y, const std::vector<double>& cuts, int k) {
  if (cuts.empty()) throw std::invalid_argument("quantize: need at least one cut point");
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (!(cuts[i] > cuts[i - 1]))
      throw std::invalid_argument("quantize: cut points must be strictly increasing");
  if (k < 1) throw std::invalid_argument("quantize: k >= 1");
  const std::size_t a = cuts.size() + 1;
  const std::size_t blocks = ipow(a, k);
  const std::size_t need = 10 * blocks;
  if (y.size() < need) {
    std::ostringstream os;
    os << "quantize: need at least " << need << " samples for " << blocks
       << " blocks, got " << y.size();
    throw std::invalid_argument(os.str());
  }

  QuantizedProcess q;
  q.midpoints = bin_midpoints(cuts);
  q.k = k;
  q.symbols.resize(y.size());
  for (std::size_t t = 0; t < y.size(); ++t)
    q.symbols[t] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), y[t]) -
                                    cuts.begin());
  // Cyclic block counts: every position starts a block, wrapping at the end,
  // so head and tail (k-1)-marginals coincide exactly.
  q.probs.assign(blocks, 0.0);
  const std::size_t L = y.size();
  for (std::size_t t = 0; t < L; ++t) {
    std::size_t idx = 0;
    for (int j = 0; j < k; ++j) idx = idx * a + static_cast<std::size_t>(q.symbols[(t + j) % L]);
    q.probs[idx] += 1.0;
  }
  for (double& p : q.probs) p /= static_cast<double>(L);
  return q;
}

QuantizedProcess marginalize_to(const QuantizedProcess& p, int k) {
  if (k < 1 || k > p.k) throw std::invalid_argument("marginalize_to: need 1 <= k <= P.k");
  QuantizedProcess q = p;
  while (q.k > k) {
    q.probs = q.boundary_marginal(0);
    --q.k;
  }
  return q;
}

std::vector<std::vector<double>> midpoint_cost(const QuantizedProcess& P,
                                               const QuantizedProcess& Q,
                                               const LossSpec& loss) {
  std::vector<std::vector<double>> c(P.alphabet_size(),
                                     std::vector<double>(Q.alphabet_size()));
  for (std::size_t i = 0; i < P.alphabet_size(); ++i)
    for (std::size_t j = 0; j < Q.alphabet_size(); ++j)
      c[i][j] = loss(P.midpoints[i], Q.midpoints[j]);
  return c;
}

std::vector<std::vector<double>> hamming_cost(std::size_t a, std::size_t b) {
  std::vector<std::vector<double>> c(a, std::vector<double>(b, 1.0));
  for (std::size_t i = 0; i < std::min(a, b); ++i) c[i][i] = 0.0;
  return c;
}

CouplingSolution solve_coupling_lp(const QuantizedProcess& P0, const QuantizedProcess& Q0,
                                   const std::vector<std::vector<double>>& cost, int k) {
  if (P0.k < k || Q0.k < k)
    throw std::invalid_argument("solve_coupling_lp: processes must have block length >= k");
  QuantizedProcess P = marginalize_to(P0, k), Q = marginalize_to(Q0, k);
  P.validate();
  Q.validate();
  const std::size_t A = P.alphabet_size(), B = Q.alphabet_size();
  if (cost.size() != A || cost[0].size() != B)
    throw std::invalid_argument("solve_coupling_lp: cost table shape mismatch");
  const std::size_t AK = P.probs.size(), BK = Q.probs.size();
  const std::size_t nvars = AK * BK;
  if (nvars > 10000)
    throw std::invalid_argument("solve_coupling_lp: problem exceeds the 10^4 variable cap");

  LpProblem lp;
  lp.nvars = nvars;
  auto var = [&](std::size_t i, std::size_t j) { return i * BK + j; };

  // marginal over A^k blocks
  for (std::size_t i = 0; i < AK; ++i) {
    std::vector<double> row(nvars, 0.0);
    for (std::size_t j = 0; j < BK; ++j) row[var(i, j)] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(P.probs[i]);
  }
  // marginal over B^k blocks
  for (std::size_t j = 0; j < BK; ++j) {
    std::vector<double> row(nvars, 0.0);
    for (std::size_t i = 0; i < AK; ++i) row[var(i, j)] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(Q.probs[j]);
  }
  // joint shift consistency: the (k-1)-head marginal of the coupling equals
  // its (k-1)-tail marginal, jointly in both coordinates
  if (k >= 2) {
    const std::size_t AH = AK / A, BH = BK / B;
    for (std::size_t ha = 0; ha < AH; ++ha)
      for (std::size_t hb = 0; hb < BH; ++hb) {
        std::vector<double> row(nvars, 0.0);
        // head: blocks (ha*A + a_last, hb*B + b_last)
        for (std::size_t al = 0; al < A; ++al)
          for (std::size_t bl = 0; bl < B; ++bl) row[var(ha * A + al, hb * B + bl)] += 1.0;
        // tail: blocks (a_first*AH + ha, b_first*BH + hb)
        for (std::size_t af = 0; af < A; ++af)
          for (std::size_t bf = 0; bf < B; ++bf) row[var(af * AH + ha, bf * BH + hb)] -= 1.0;
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(0.0);
      }
  }

  lp.cost.assign(nvars, 0.0);
  const std::size_t AH = AK / A;  // a-block leading symbol = index / AH
  const std::size_t BH = BK / B;
  for (std::size_t i = 0; i < AK; ++i)
    for (std::size_t j = 0; j < BK; ++j) lp.cost[var(i, j)] = cost[i / AH][j / BH];

  LpSolution sol = simplex_solve(lp);
  if (sol.status != LpSolution::Status::Optimal)
    throw std::logic_error("solve_coupling_lp: LP not optimal (marginals are always coupleable)");
  return {sol.value, std::move(sol.x), AK, BK};
}

double distortion_lower_bound(const QuantizedProcess& P, const QuantizedProcess& Q,
                              const std::vector<std::vector<double>>& cost, int k) {
  return solve_coupling_lp(P, Q, cost, k).value;
}

namespace {

std::size_t cyclic_shift_block(std::size_t idx, std::size_t a, int k, int s) {
  std::vector<std::size_t> sym(k);
  for (int j = k - 1; j >= 0; --j) {
    sym[j] = idx % a;
    idx /= a;
  }
  std::size_t out = 0;
  for (int j = 0; j < k; ++j) out = out * a + sym[(j + s) % k];
  return out;
}

}  // namespace

double distortion_upper_bound(const QuantizedProcess& P, const QuantizedProcess& Q,
                              const std::vector<std::vector<double>>& cost,
                              JoiningStrategy strategy) {
  switch (strategy) {
    case JoiningStrategy::Product: {
      QuantizedProcess p1 = marginalize_to(P, 1), q1 = marginalize_to(Q, 1);
      double v = 0.0;
      for (std::size_t i = 0; i < p1.probs.size(); ++i)
        for (std::size_t j = 0; j < q1.probs.size(); ++j)
          v += p1.probs[i] * q1.probs[j] * cost[i][j];
      return v;
    }
    case JoiningStrategy::DiagonalIfEqual: {
      if (P.alphabet_size() != Q.alphabet_size() || P.k != Q.k ||
          P.probs.size() != Q.probs.size())
        throw std::invalid_argument("distortion_upper_bound: diagonal needs identical shapes");
      for (std::size_t i = 0; i < P.probs.size(); ++i)
        if (std::abs(P.probs[i] - Q.probs[i]) > 1e-9)
          throw std::invalid_argument("distortion_upper_bound: diagonal needs P == Q");
      QuantizedProcess p1 = marginalize_to(P, 1);
      double v = 0.0;
      for (std::size_t i = 0; i < p1.probs.size(); ++i) v += p1.probs[i] * cost[i][i];
      return v;
    }
    case JoiningStrategy::BestCyclicShift: {
      if (P.alphabet_size() != Q.alphabet_size() || P.k != Q.k)
        throw std::invalid_argument("distortion_upper_bound: cyclic shift needs matching shapes");
      const std::size_t a = P.alphabet_size();
      double best = std::numeric_limits<double>::infinity();
      for (int s = 0; s < P.k; ++s) {
        // feasible iff rotating P's blocks left by s reproduces Q's law
        std::vector<double> image(Q.probs.size(), 0.0);
        for (std::size_t i = 0; i < P.probs.size(); ++i)
          image[cyclic_shift_block(i, a, P.k, s)] += P.probs[i];
        double diff = 0.0;
        for (std::size_t j = 0; j < image.size(); ++j)
          diff = std::max(diff, std::abs(image[j] - Q.probs[j]));
        if (diff > 1e-9) continue;
        const std::size_t head = P.probs.size() / a;
        double v = 0.0;
        for (std::size_t i = 0; i < P.probs.size(); ++i) {
          std::size_t first = i / head;
          std::size_t at_s = cyclic_shift_block(i, a, P.k, s) / head;
          v += P.probs[i] * cost[first][at_s];
        }
        best = std::min(best, v);
      }
      if (!std::isfinite(best))
        throw std::invalid_argument(
            "distortion_upper_bound: no cyclic shift of P matches Q");
      return best;
    }
  }
  throw std::invalid_argument("distortion_upper_bound: unknown strategy");
}

DistortionBounds distortion_bounds(const QuantizedProcess& P, const QuantizedProcess& Q,
                                   const std::vector<std::vector<double>>& cost, int k) {
  DistortionBounds out;
  out.k = k;
  out.lower = distortion_lower_bound(P, Q, cost, k);
  out.upper = distortion_upper_bound(P, Q, cost, JoiningStrategy::Product);
  out.joining_used = "product";
  for (auto [strat, name] : {std::pair{JoiningStrategy::DiagonalIfEqual, "diagonal"},
                             std::pair{JoiningStrategy::BestCyclicShift, "best-cyclic-shift"}}) {
    try {
      double v = distortion_upper_bound(P, Q, cost, strat);
      if (v < out.upper) {
        out.upper = v;
        out.joining_used = name;
      }
    } catch (const std::invalid_argument&) {
      // strategy not applicable to this pair
    }
  }
  return out;
}

SignalNoiseResult signal_noise_identity_check(const ModelFamily& fam, const RealSequence& V,
                                              double sigma, int k,
                                              const std::vector<double>& cuts,
                                              std::uint64_t seed, int x_grid_points) {
  if (V.empty()) throw std::invalid_argument("signal_noise_identity_check: empty signal");
  if (sigma < 0.0) throw std::invalid_argument("signal_noise_identity_check: sigma >= 0");
  const int n = static_cast<int>(V.size());

  RealSequence y = V;
  if (sigma > 0.0) {
    CounterRng rng(CounterRng::derive_key(seed, "signal_noise"));
    for (double& v : y) v += sigma * rng.gaussian();
  }
  QuantizedProcess QY = quantize(y, cuts, k);
  QuantizedProcess QV = quantize(V, cuts, k);

  // candidate model processes: theta grid x initial-state grid
  std::vector<Theta> thetas;
  {
    std::vector<std::vector<double>> axes;
    for (const Axis& a : fam.params.axes) {
      std::vector<double> vals;
      if (a.discrete)
        for (long v = std::llround(a.lo); v <= std::llround(a.hi); ++v)
          vals.push_back(static_cast<double>(v));
      else
        for (int i = 0; i < a.grid_n; ++i)
          vals.push_back(a.wrap ? a.lo + (a.hi - a.lo) * i / a.grid_n
                                : a.lo + (a.hi - a.lo) * i / (a.grid_n - 1));
      axes.push_back(std::move(vals));
    }
    thetas.push_back({});
    for (const auto& vals : axes) {
      std::vector<Theta> next;
      for (const auto& t : thetas)
        for (double v : vals) {
          Theta t2 = t;
          t2.push_back(v);
          next.push_back(std::move(t2));
        }
      thetas = std::move(next);
    }
  }
  std::vector<State> xs;
  {
    int g = std::max(2, x_grid_points);
    std::vector<std::vector<double>> axes(fam.state_dim);
    for (auto& vals : axes)
      for (int i = 0; i < g; ++i)
        vals.push_back(fam.domain == StateDomain::SymbolicShift ? static_cast<double>(i)
                       : fam.domain == StateDomain::TorusPower ? static_cast<double>(i) / g
                                                               : static_cast<double>(i) / (g - 1));
    xs.push_back({});
    for (const auto& vals : axes) {
      std::vector<State> next;
      for (const auto& x : xs)
        for (double v : vals) {
          State x2 = x;
          x2.push_back(v);
          next.push_back(std::move(x2));
        }
      xs = std::move(next);
    }
  }

  LossSpec sq{LossSpec::Kind::Squared, {}};
  const std::size_t total = thetas.size() * xs.size();
  std::vector<double> lhs_vals(total), rhs_vals(total);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < total; ++c) {
    const Theta& th = thetas[c / xs.size()];
    const State& x0 = xs[c % xs.size()];
    RealSequence u = orbit(fam, th, x0, n);
    QuantizedProcess QU = quantize(u, cuts, k);
    auto cost_y = midpoint_cost(QU, QY, sq);
    lhs_vals[c] = distortion_lower_bound(QU, QY, cost_y, k);
    rhs_vals[c] = distortion_lower_bound(QU, QV, midpoint_cost(QU, QV, sq), k);
  }
  SignalNoiseResult out;
  out.lhs = *std::min_element(lhs_vals.begin(), lhs_vals.end());
  out.rhs = *std::min_element(rhs_vals.begin(), rhs_vals.end()) + sigma * sigma;
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

std::string distortion_bounds_json(const DistortionBounds& b) {
  nlohmann::json j{{"lower", b.lower}, {"upper", b.upper}, {"k", b.k},
                   {"joining_used", b.joining_used}};
  return j.dump(2);
}

std::string coupling_csv(const CouplingSolution& s) {
  std::ostringstream os;
  os << "a_block,b_block,mass\n";
  for (std::size_t i = 0; i < s.a_blocks; ++i)
    for (std::size_t j = 0; j < s.b_blocks; ++j) {
      double m = s.coupling[i * s.b_blocks + j];
      if (m > 0.0) os << i << ',' << j << ',' << m << '\n';
    }
  return os.str();
}

}  // namespace ergofit
