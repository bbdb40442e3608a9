#include "ergofit/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"

namespace ergofit {
namespace {

void check_packing_args(const SequenceSample& sample, double r, double p, int horizon) {
  if (sample.entry_count() == 0) throw std::invalid_argument("greedy_packing: empty sample");
  if (!(r > 0.0)) throw std::invalid_argument("greedy_packing: r must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("greedy_packing: p must be >= 1 or inf");
  if (horizon > sample.n) throw std::invalid_argument("greedy_packing: horizon exceeds sample length");
}

// Spatial hash on the first m coordinates. If d_{h,p}(u,v) <= r then every
// prefix coordinate differs by at most `cell`, so any representative that can
// reject a candidate lives in one of the 3^m neighbor cells. The grid is
// dense (flat bucket array); m is chosen so the cell table stays small.
struct PrefixGrid {
  // Bucket entries carry the next two prefix coordinates so most candidates
  // are rejected without touching the representative's row (a cache miss).
  struct Entry {
    std::uint32_t idx;
    float c[4];
  };

  int m = 0;
  int extra = 0;  // number of carried coordinates (0..4)
  double cell = 1.0;
  std::vector<long> base;     // per-axis lowest cell index
  std::vector<long> extent;   // per-axis cell count
  std::vector<std::size_t> stride;
  std::vector<std::vector<Entry>> buckets;

  PrefixGrid(const SequenceSample& sample, double r, double p, int h) {
    cell = (p == kPInf) ? r : r * std::pow(static_cast<double>(h), 1.0 / p);
    // Per-axis value ranges over the sample prefix.
    const int max_m = std::min(h, 8);
    std::vector<double> lo(max_m, 0.0), hi(max_m, 0.0);
    const std::size_t count = sample.entry_count();
    for (int k = 0; k < max_m; ++k) {
      double a = sample.values[k], b = a;
      for (std::size_t i = 1; i < count; ++i) {
        double v = sample.values[i * static_cast<std::size_t>(sample.n) + k];
        a = std::min(a, v);
        b = std::max(b, v);
      }
      lo[k] = a;
      hi[k] = b;
    }
    // Grow the prefix while the dense table stays below ~16M cells and does
    // not dwarf the sample itself (the table is zero-initialized per call).
    const std::size_t kMaxCells = std::min(std::size_t{1} << 24, 4 * count + 1024);
    std::size_t cells = 1;
    for (int k = 0; k < max_m; ++k) {
      long b0 = static_cast<long>(std::floor(lo[k] / cell));
      long b1 = static_cast<long>(std::floor(hi[k] / cell));
      std::size_t ext = static_cast<std::size_t>(b1 - b0 + 1);
      if (cells > kMaxCells / ext) break;
      cells *= ext;
      base.push_back(b0);
      extent.push_back(static_cast<long>(ext));
      ++m;
    }
    stride.resize(m);
    std::size_t s = 1;
    for (int k = m - 1; k >= 0; --k) {
      stride[k] = s;
      s *= static_cast<std::size_t>(extent[k]);
    }
    buckets.resize(cells);
    extra = std::min(4, h - m);
  }

  void coords(const double* u, long* q) const {
    for (int k = 0; k < m; ++k) {
      long c = static_cast<long>(std::floor(u[k] / cell)) - base[k];
      q[k] = std::clamp(c, 0L, extent[k] - 1);
    }
  }

  std::size_t flat(const long* q) const {
    std::size_t idx = 0;
    for (int k = 0; k < m; ++k) idx += static_cast<std::size_t>(q[k]) * stride[k];
    return idx;
  }

  void insert(const long* q, std::uint32_t idx, const double* u) {
    Entry e{idx, {0.0f, 0.0f, 0.0f, 0.0f}};
    for (int j = 0; j < extra; ++j) e.c[j] = static_cast<float>(u[m + j]);
    buckets[flat(q)].push_back(e);
  }

  // Visits every bucket in the 3^m neighborhood of q; fn returns true to stop.
  template <class Fn>
  bool visit_neighbors(const long* q, Fn&& fn) const {
    long off[8];
    for (int k = 0; k < m; ++k) off[k] = -1;
    for (;;) {
      bool in_range = true;
      std::size_t idx = 0;
      for (int k = 0; k < m; ++k) {
        long c = q[k] + off[k];
        if (c < 0 || c >= extent[k]) {
          in_range = false;
          break;
        }
        idx += static_cast<std::size_t>(c) * stride[k];
      }
      if (in_range && fn(buckets[idx])) return true;
      int k = m - 1;
      while (k >= 0 && off[k] == 1) off[k--] = -1;
      if (k < 0) return false;
      ++off[k];
    }
  }
};

}  // namespace

PackingResult greedy_packing(const SequenceSample& sample, double r, double p, int horizon) {
  const int h = horizon < 0 ? sample.n : horizon;
  check_packing_args(sample, r, p, h);
  const std::size_t count = sample.entry_count();
  const std::size_t n = static_cast<std::size_t>(sample.n);
  PrefixGrid grid(sample, r, p, h);
  PackingResult out;
  long q[8];
  // Any representative within r of the candidate agrees with it to within
  // `cell` on every prefix coordinate, including the two carried in the
  // bucket entry; the float comparison gets a half-ulp of slack.
  const float gate = static_cast<float>(grid.cell) + 1e-5f;
  for (std::size_t i = 0; i < count; ++i) {
    const double* u = sample.values.data() + i * n;
    grid.coords(u, q);
    float uc[4] = {0.0f, 0.0f, 0.0f, 0.0f};
    for (int j = 0; j < grid.extra; ++j) uc[j] = static_cast<float>(u[grid.m + j]);
    bool near = grid.visit_neighbors(q, [&](const std::vector<PrefixGrid::Entry>& bucket) {
      for (const auto& e : bucket) {
        bool gated = false;
        for (int j = 0; j < grid.extra; ++j)
          if (std::abs(e.c[j] - uc[j]) > gate) {
            gated = true;
            break;
          }
        if (gated) continue;
        const double* v = sample.values.data() + e.idx * n;
        if (pseudo_metric_above({u, static_cast<std::size_t>(h)},
                                {v, static_cast<std::size_t>(h)}, p, r) <= r)
          return true;
      }
      return false;
    });
    if (!near) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      grid.insert(q, static_cast<std::uint32_t>(i), u);
    }
  }
  out.count = out.indices.size();
  return out;
}

PackingResult greedy_packing_ref(const SequenceSample& sample, double r, double p, int horizon) {
  const int h = horizon < 0 ? sample.n : horizon;
  check_packing_args(sample, r, p, h);
  const std::size_t count = sample.entry_count();
  const std::size_t n = static_cast<std::size_t>(sample.n);
  PackingResult out;
  for (std::size_t i = 0; i < count; ++i) {
    const double* u = sample.values.data() + i * n;
    bool near = false;
    for (std::uint32_t j : out.indices) {
      const double* v = sample.values.data() + j * n;
      if (pseudo_metric_above({u, static_cast<std::size_t>(h)},
                              {v, static_cast<std::size_t>(h)}, p, r) <= r) {
        near = true;
        break;
      }
    }
    if (!near) out.indices.push_back(static_cast<std::uint32_t>(i));
  }
  out.count = out.indices.size();
  return out;
}

std::size_t cover_count(const SequenceSample& sample, double r, double p, int horizon) {
  // The greedy pass that keeps a point iff it is > r from all kept points
  // yields a set that is simultaneously a maximal r-packing and an r-cover
  // (every rejected point is within r of its rejecting representative), so
  // the cover shares the packing kernel and N(r) <= M(r) holds as equality
  // here while M(2r) <= N(r) holds by the standard sandwich.
  return greedy_packing(sample, r, p, horizon).count;
}

ComplexityReport entropy_profile(const SequenceSample& sample, const EntropyProfileConfig& cfg) {
  if (cfg.radii.empty() || cfg.horizons.empty())
    throw std::invalid_argument("entropy_profile: radii and horizons must be nonempty");
  for (double r : cfg.radii)
    if (!(r > 0.0)) throw std::invalid_argument("entropy_profile: radii must be positive");
  for (std::size_t i = 1; i < cfg.horizons.size(); ++i)
    if (cfg.horizons[i] <= cfg.horizons[i - 1])
      throw std::invalid_argument("entropy_profile: horizons must be increasing");
  if (cfg.horizons.back() > sample.n)
    throw std::invalid_argument("entropy_profile: horizon exceeds sample length");

  ComplexityReport rep;
  rep.family_id = sample.family_id;
  rep.p = cfg.p;
  rep.radii = cfg.radii;
  rep.horizons = cfg.horizons;
  const std::size_t nh = cfg.horizons.size(), nr = cfg.radii.size();
  rep.pack_counts.assign(nh, std::vector<std::size_t>(nr, ComplexityReport::kRefusedCell));
  rep.cover_counts = rep.pack_counts;

  // Cells are independent; greedy passes stay sequential inside each cell.
#pragma omp parallel for collapse(2) schedule(dynamic, 1)
  for (std::size_t hi = 0; hi < nh; ++hi) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      const int n = cfg.horizons[hi];
      if (sample.entry_count() * static_cast<std::size_t>(n) > cfg.cell_budget) continue;
      auto packed = greedy_packing(sample, cfg.radii[ri], cfg.p, n);
      rep.pack_counts[hi][ri] = packed.count;
      rep.cover_counts[hi][ri] = packed.count;
    }
  }

  // Per-radius LS slope of log N vs n over the top half of horizons.
  rep.slopes.assign(nr, std::numeric_limits<double>::quiet_NaN());
  const std::size_t first = nh / 2;
  for (std::size_t ri = 0; ri < nr; ++ri) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t hi = first; hi < nh; ++hi) {
      if (rep.cover_counts[hi][ri] == ComplexityReport::kRefusedCell) continue;
      double x = cfg.horizons[hi];
      double y = std::log(static_cast<double>(rep.cover_counts[hi][ri]));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++m;
    }
    if (m >= 2) rep.slopes[ri] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

ComplexityReport entropy_profile(const ModelFamily& fam, const std::vector<Theta>& theta_grid,
                                 const std::vector<State>& x_grid,
                                 const EntropyProfileConfig& cfg) {
  if (cfg.horizons.empty()) throw std::invalid_argument("entropy_profile: horizons must be nonempty");
  SequenceSample sample = sample_sequences(fam, theta_grid, x_grid, cfg.horizons.back());
  return entropy_profile(sample, cfg);
}

void QuantizedProcess::validate(double mass_tol, double stat_tol) const {
  const std::size_t a = alphabet_size();
  if (a == 0 || k < 1) throw std::invalid_argument("QuantizedProcess: empty alphabet or k < 1");
  std::size_t want = 1;
  for (int i = 0; i < k; ++i) want *= a;
  if (probs.size() != want) throw std::invalid_argument("QuantizedProcess: block table size mismatch");
  double mass = 0.0;
  for (double q : probs) {
    if (q < 0.0) throw std::invalid_argument("QuantizedProcess: negative probability");
    mass += q;
  }
  if (std::abs(mass - 1.0) > mass_tol)
    throw std::invalid_argument("QuantizedProcess: mass not 1");
  if (k > 1) {
    auto head = boundary_marginal(0), tail = boundary_marginal(1);
    for (std::size_t i = 0; i < head.size(); ++i)
      if (std::abs(head[i] - tail[i]) > stat_tol)
        throw std::invalid_argument("QuantizedProcess: not stationary-consistent");
  }
}

std::vector<double> QuantizedProcess::boundary_marginal(int offset) const {
  const std::size_t a = alphabet_size();
  std::size_t sub = 1;
  for (int i = 0; i < k - 1; ++i) sub *= a;
  std::vector<double> out(sub, 0.0);
  for (std::size_t b = 0; b < probs.size(); ++b) {
    // lexicographic block index: first symbol is the most significant digit
    std::size_t idx = offset == 0 ? b / a : b % sub;
    out[idx] += probs[b];
  }
  return out;
}

double block_entropy(const QuantizedProcess& q) {
  q.validate();
  double h = 0.0;
  for (double pr : q.probs)
    if (pr > 0.0) h -= pr * std::log(pr);
  return h / q.k;
}

double binary_entropy2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

PackingBoundResult packing_bound_check(const RealSequence& u, double delta, double p,
                                       double K, const SequenceSample& probes) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("packing_bound_check: delta in (0,1)");
  if (!(p >= 1.0) || p == kPInf) throw std::invalid_argument("packing_bound_check: p must be finite");
  if (!(K >= 1.0)) throw std::invalid_argument("packing_bound_check: K >= 1 required");
  if (static_cast<std::size_t>(probes.n) != u.size())
    throw std::invalid_argument("packing_bound_check: probe length mismatch");
  const double eps = std::pow(delta / 2.0, (1.0 + p) / p);
  for (std::size_t i = 0; i < probes.entry_count(); ++i) {
    auto s = probes.seq(i);
    if (pseudo_metric(u, s, p) > eps + 1e-12)
      throw std::domain_error("packing_bound_check: probe outside the eps-ball");
    for (double v : s)
      if (std::abs(v) > K + 1e-12)
        throw std::domain_error("packing_bound_check: probe value outside [-K,K]");
  }
  const double n = static_cast<double>(probes.n);
  PackingBoundResult out;
  out.measured = greedy_packing(probes, delta, kPInf).count;
  out.bound = std::pow(3.0 * K / delta, delta * n / 2.0) *
              std::exp2(binary_entropy2(delta / 2.0) * n);
  out.pass = static_cast<double>(out.measured) <= out.bound;
  return out;
}

std::string complexity_report_csv(const ComplexityReport& rep) {
  std::ostringstream os;
  os << "p,n,r,N,M\n";
  for (std::size_t hi = 0; hi < rep.horizons.size(); ++hi)
    for (std::size_t ri = 0; ri < rep.radii.size(); ++ri) {
      os << (rep.p == kPInf ? std::string("inf") : std::to_string(rep.p)) << ','
         << rep.horizons[hi] << ',' << rep.radii[ri] << ',';
      if (rep.cover_counts[hi][ri] == ComplexityReport::kRefusedCell)
        os << "refused,refused\n";
      else
        os << rep.cover_counts[hi][ri] << ',' << rep.pack_counts[hi][ri] << '\n';
    }
  return os.str();
}

std::string complexity_report_json(const ComplexityReport& rep) {
  nlohmann::json j;
  j["family_id"] = rep.family_id;
  j["p"] = rep.p == kPInf ? nlohmann::json("inf") : nlohmann::json(rep.p);
  j["radii"] = rep.radii;
  j["horizons"] = rep.horizons;
  auto table = [&](const std::vector<std::vector<std::size_t>>& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t) {
      nlohmann::json r = nlohmann::json::array();
      for (std::size_t c : row)
        r.push_back(c == ComplexityReport::kRefusedCell ? nlohmann::json("refused")
                                                        : nlohmann::json(c));
      rows.push_back(std::move(r));
    }
    return rows;
  };
  j["cover_counts"] = table(rep.cover_counts);
  j["pack_counts"] = table(rep.pack_counts);
  j["slopes"] = rep.slopes;
  return j.dump(2);
}

}  // namespace ergofit
