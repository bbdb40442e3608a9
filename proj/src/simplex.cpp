#include "ergofit/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ergofit {
namespace {

constexpr double kTol = 1e-9;

// Tableau with explicit basis bookkeeping. Column layout: structural
// variables then artificials; the objective row holds reduced costs.
struct Tableau {
  std::size_t m, n;                      // rows, total columns (excl. rhs)
  std::vector<std::vector<double>> a;    // m x n
  std::vector<double> b;                 // m
  std::vector<double> z;                 // reduced costs, n
  double obj = 0.0;
  std::vector<std::size_t> basis;        // m entries, column index per row

  void pivot(std::size_t r, std::size_t c) {
    double piv = a[r][c];
    for (std::size_t j = 0; j < n; ++j) a[r][j] /= piv;
    b[r] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || a[i][c] == 0.0) continue;
      double f = a[i][c];
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    if (z[c] != 0.0) {
      double f = z[c];
      for (std::size_t j = 0; j < n; ++j) z[j] -= f * a[r][j];
      obj += f * b[r];
    }
    basis[r] = c;
  }

  // Entering rule: Dantzig (most negative reduced cost) while the objective
  // is moving, Bland (smallest eligible column) once pivots stall, which
  // breaks degenerate cycles. Leaving = min ratio, ties broken by smallest
  // basis column. Returns false at optimality; throws on unboundedness.
  bool step(std::size_t ncols, bool bland) {
    std::size_t c = ncols;
    if (bland) {
      for (std::size_t j = 0; j < ncols; ++j)
        if (z[j] < -kTol) {
          c = j;
          break;
        }
    } else {
      double best_z = -kTol;
      for (std::size_t j = 0; j < ncols; ++j)
        if (z[j] < best_z) {
          best_z = z[j];
          c = j;
        }
    }
    if (c == ncols) return false;
    std::size_t r = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (a[i][c] <= kTol) continue;
      double ratio = b[i] / a[i][c];
      if (ratio < best - kTol || (ratio < best + kTol && (r == m || basis[i] < basis[r]))) {
        best = ratio;
        r = i;
      }
    }
    if (r == m) throw std::runtime_error("simplex: unbounded");
    pivot(r, c);
    return true;
  }
};

// Runs the current objective to optimality. Dantzig pivots by default; after
// `m` consecutive pivots without objective change we are in a degenerate
// series and switch to Bland's rule until the objective moves again.
void run_to_optimality(Tableau& t, std::size_t ncols) {
  double last_obj = t.obj;
  std::size_t stall = 0;
  while (t.step(ncols, stall > t.m)) {
    if (std::abs(t.obj - last_obj) > 1e-12) {
      last_obj = t.obj;
      stall = 0;
    } else {
      ++stall;
    }
  }
}

}  // namespace

LpSolution simplex_solve(const LpProblem& p) {
  const std::size_t m = p.rows.size(), nv = p.nvars;
  if (p.rhs.size() != m || p.cost.size() != nv)
    throw std::invalid_argument("simplex_solve: inconsistent problem dimensions");

  Tableau t;
  t.m = m;
  t.n = nv + m;  // structural + one artificial per row
  t.a.assign(m, std::vector<double>(t.n, 0.0));
  t.b.resize(m);
  t.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = p.rhs[i] >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < nv; ++j) t.a[i][j] = s * p.rows[i][j];
    t.b[i] = s * p.rhs[i];
    t.a[i][nv + i] = 1.0;
    t.basis[i] = nv + i;
  }

  // Phase 1: minimize the sum of artificials.
  t.z.assign(t.n, 0.0);
  t.obj = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) t.z[j] -= t.a[i][j];
    t.obj += t.b[i];
  }
  run_to_optimality(t, nv);
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis[i] >= nv) infeas += t.b[i];
  if (infeas > 1e-7) return {LpSolution::Status::Infeasible, 0.0, {}};

  // Drive surviving artificials out of the basis; rows where no structural
  // pivot exists are redundant and get neutralized.
  std::vector<bool> redundant(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < nv) continue;
    std::size_t c = nv;
    for (std::size_t j = 0; j < nv; ++j)
      if (std::abs(t.a[i][j]) > kTol) {
        c = j;
        break;
      }
    if (c == nv) {
      redundant[i] = true;
      continue;
    }
    t.pivot(i, c);
  }

  // Phase 2 over structural columns only; artificial columns are frozen by
  // never entering (step scans the first nv columns).
  t.z.assign(t.n, 0.0);
  t.obj = 0.0;
  for (std::size_t j = 0; j < nv; ++j) t.z[j] = p.cost[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (redundant[i] || t.basis[i] >= nv) continue;
    double f = t.z[t.basis[i]];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < t.n; ++j) t.z[j] -= f * t.a[i][j];
  }
  try {
    run_to_optimality(t, nv);
  } catch (const std::runtime_error&) {
    return {LpSolution::Status::Unbounded, 0.0, {}};
  }

  LpSolution out;
  out.status = LpSolution::Status::Optimal;
  out.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (!redundant[i] && t.basis[i] < nv) out.x[t.basis[i]] = t.b[i];
  out.value = 0.0;
  for (std::size_t j = 0; j < nv; ++j) out.value += p.cost[j] * out.x[j];
  return out;
}

}  // namespace ergofit
