#include "ergofit/families.hpp"

#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>

namespace ergofit {

namespace {

double wrap01(double x) { return x - std::floor(x); }

}  // namespace

bool ParameterSpace::contains(const Theta& theta, double tol) const {
  if (theta.size() != axes.size()) return false;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Axis& a = axes[i];
    double v = theta[i];
    if (a.wrap) continue;  // torus coordinate, any real reduces mod 1
    if (a.discrete && std::abs(v - std::round(v)) > tol) return false;
    if (v < a.lo - tol || v > a.hi + tol) return false;
  }
  return true;
}

void ParameterSpace::validate() const {
  for (const Axis& a : axes) {
    if (!(a.lo <= a.hi) || !std::isfinite(a.lo) || !std::isfinite(a.hi))
      throw std::invalid_argument("parameter axis must be a nonempty bounded interval");
    if (!a.discrete && a.grid_n < 2)
      throw std::invalid_argument("continuous axis needs grid_resolution >= 2");
  }
}

bool ModelFamily::state_in_domain(const State& x, double tol) const {
  if (static_cast<int>(x.size()) != state_dim) return false;
  switch (domain) {
    case StateDomain::UnitIntervalPower:
      for (double v : x)
        if (v < -tol || v > 1.0 + tol) return false;
      return true;
    case StateDomain::TorusPower:
      for (double v : x)
        if (!std::isfinite(v)) return false;
      return true;
    case StateDomain::SymbolicShift:
      return x.size() == 1 && x[0] >= 0 && x[0] == std::floor(x[0]);
  }
  return false;
}

ModelFamily make_logistic(double a_lo, double a_hi) {
  if (!(0.0 <= a_lo && a_lo <= a_hi && a_hi <= 4.0))
    throw std::invalid_argument("logistic parameter range must lie inside [0,4]");
  ModelFamily fam;
  fam.id = "logistic";
  fam.params.axes = {Axis{a_lo, a_hi, false, false, 256}};
  fam.state_dim = 1;
  fam.domain = StateDomain::UnitIntervalPower;
  fam.bound_K = 1.0;
  fam.step = [](const Theta& th, State& x) {
    double a = th[0];
    x[0] = a * x[0] * (1.0 - x[0]);
  };
  fam.observe = [](const Theta&, const State& x) { return x[0]; };
  return fam;
}

ModelFamily make_rotation(int d, std::vector<ObservationEntry> dictionary) {
  if (d < 1) throw std::invalid_argument("rotation needs d >= 1");
  if (dictionary.empty()) throw std::invalid_argument("rotation dictionary must be nonempty");
  ModelFamily fam;
  fam.id = "rotation";
  for (int i = 0; i < d; ++i) fam.params.axes.push_back(Axis{0.0, 1.0, true, false, 256});
  fam.params.axes.push_back(
      Axis{0.0, static_cast<double>(dictionary.size() - 1), false, true,
           static_cast<int>(dictionary.size())});
  fam.state_dim = d;
  fam.domain = StateDomain::TorusPower;
  double K = 0.0;
  for (const auto& e : dictionary) K = std::max(K, e.sup_norm);
  fam.bound_K = K;
  auto dict = std::make_shared<std::vector<ObservationEntry>>(std::move(dictionary));
  fam.step = [d](const Theta& th, State& x) {
    for (int i = 0; i < d; ++i) x[i] = wrap01(x[i] + th[i]);
  };
  fam.observe = [d, dict](const Theta& th, const State& x) {
    auto idx = static_cast<std::size_t>(std::llround(th[d]));
    return (*dict)[idx].f(x);
  };
  return fam;
}

ModelFamily make_identity_vs_chaos() {
  ModelFamily fam;
  fam.id = "identity_vs_chaos";
  fam.params.axes = {Axis{0.0, 1.0, false, true, 2}};
  fam.state_dim = 1;
  fam.domain = StateDomain::UnitIntervalPower;
  fam.bound_K = 1.0;
  fam.step = [](const Theta& th, State& x) {
    if (std::llround(th[0]) == 1) x[0] = 4.0 * x[0] * (1.0 - x[0]);
  };
  fam.observe = [](const Theta&, const State& x) { return x[0]; };
  return fam;
}

namespace {

// Fixed point of a primitive expanding substitution, expanded lazily from the
// seed symbol; the buffer doubles on demand behind a mutex so step/observe
// stay logically pure and safe for shared use.
class SubstFixedPoint {
 public:
  SubstFixedPoint(std::map<int, std::vector<int>> rules, int seed)
      : rules_(std::move(rules)), seed_(seed) {
    buf_ = {seed_};
    grow_to(1024);
  }

  int at(std::size_t i) const {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (i < buf_.size()) return buf_[i];
    }
    grow_to(i + 1);
    std::lock_guard<std::mutex> lock(mu_);
    return buf_[i];
  }

 private:
  void grow_to(std::size_t want) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (buf_.size() < want) {
      // One substitution pass at least doubles the buffer (expanding rules).
      std::vector<int> next;
      next.reserve(buf_.size() * 2);
      for (int s : buf_) {
        const auto& w = rules_.at(s);
        next.insert(next.end(), w.begin(), w.end());
      }
      buf_ = std::move(next);
    }
  }

  std::map<int, std::vector<int>> rules_;
  int seed_;
  mutable std::vector<int> buf_;
  mutable std::mutex mu_;
};

// Every iterate of every symbol eventually contains every symbol.
bool is_primitive(const std::map<int, std::vector<int>>& rules,
                  const std::vector<int>& alphabet) {
  for (int s : alphabet) {
    std::set<int> reached = {s};
    for (std::size_t it = 0; it < alphabet.size() + 1; ++it) {
      std::set<int> next;
      for (int t : reached)
        for (int u : rules.at(t)) next.insert(u);
      reached = std::move(next);
    }
    if (reached.size() != alphabet.size()) return false;
  }
  return true;
}

}  // namespace

ModelFamily make_substitution(const std::map<int, std::vector<int>>& rules,
                              const std::vector<int>& alphabet,
                              const std::map<int, double>& value_map) {
  if (alphabet.empty()) throw std::invalid_argument("empty alphabet");
  for (int s : alphabet) {
    auto it = rules.find(s);
    if (it == rules.end() || it->second.empty())
      throw std::invalid_argument("substitution rules must cover the alphabet");
    if (value_map.find(s) == value_map.end())
      throw std::invalid_argument("value_map must cover the alphabet");
  }
  if (alphabet.size() > 1 && !is_primitive(rules, alphabet))
    throw std::invalid_argument("substitution rules must be primitive");
  // Expansion: every image word must reach length >= 2 under some iterate of
  // the rules (iterating does not change the fixed point). Rules like the
  // Fibonacci pair 0 -> 01, 1 -> 0 become expanding after one squaring.
  auto expanded = rules;
  auto all_long = [&] {
    for (int s : alphabet)
      if (expanded.at(s).size() < 2) return false;
    return true;
  };
  for (std::size_t it = 0; it < alphabet.size() + 2 && !all_long(); ++it) {
    std::map<int, std::vector<int>> next;
    for (int s : alphabet) {
      std::vector<int> w;
      for (int t : expanded.at(s)) {
        const auto& img = rules.at(t);
        w.insert(w.end(), img.begin(), img.end());
      }
      next[s] = std::move(w);
    }
    expanded = std::move(next);
  }
  if (!all_long()) throw std::invalid_argument("substitution rules must be expanding");
  // The fixed point needs a seed symbol whose image starts with itself.
  int seed = -1;
  for (int s : alphabet)
    if (expanded.at(s).front() == s) {
      seed = s;
      break;
    }
  if (seed < 0) throw std::invalid_argument("no symbol s with rule(s) starting with s");

  ModelFamily fam;
  fam.id = "substitution";
  fam.params.axes = {Axis{0.0, 0.0, false, true, 1}};
  fam.state_dim = 1;
  fam.domain = StateDomain::SymbolicShift;
  double K = 0.0;
  for (const auto& [s, v] : value_map) K = std::max(K, std::abs(v));
  fam.bound_K = K;
  auto fp = std::make_shared<SubstFixedPoint>(expanded, seed);
  auto vm = std::make_shared<std::map<int, double>>(value_map);
  fam.step = [](const Theta&, State& x) { x[0] += 1.0; };
  fam.observe = [fp, vm](const Theta&, const State& x) {
    return vm->at(fp->at(static_cast<std::size_t>(x[0])));
  };
  return fam;
}

ModelFamily make_thue_morse() {
  ModelFamily fam = make_substitution({{0, {0, 1}}, {1, {1, 0}}}, {0, 1},
                                      {{0, 0.0}, {1, 1.0}});
  fam.id = "thue_morse";
  return fam;
}

ModelFamily make_fibonacci() {
  ModelFamily fam = make_substitution({{0, {0, 1}}, {1, {0}}}, {0, 1},
                                      {{0, 0.0}, {1, 1.0}});
  fam.id = "fibonacci";
  return fam;
}

}  // namespace ergofit
