#include <cmath>

#include "doctest.h"
#include "ergofit/simplex.hpp"

using namespace ergofit;

TEST_CASE("simplex solves a small equality-form LP") {
  // min -x1 - 2 x2 s.t. x1 + x2 + s = 4, x2 + t = 3, all >= 0.
  LpProblem p;
  p.nvars = 4;
  p.rows = {{1, 1, 1, 0}, {0, 1, 0, 1}};
  p.rhs = {4, 3};
  p.cost = {-1, -2, 0, 0};
  auto s = simplex_solve(p);
  REQUIRE(s.status == LpSolution::Status::Optimal);
  CHECK(s.value == doctest::Approx(-7.0));  // x1 = 1, x2 = 3
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(3.0));
}

TEST_CASE("simplex detects infeasibility") {
  // x1 = 1 and x1 = 2 simultaneously.
  LpProblem p;
  p.nvars = 1;
  p.rows = {{1}, {1}};
  p.rhs = {1, 2};
  p.cost = {1};
  CHECK(simplex_solve(p).status == LpSolution::Status::Infeasible);
}

TEST_CASE("simplex detects unboundedness") {
  // min -x1 s.t. x1 - x2 = 0: ray x1 = x2 -> inf.
  LpProblem p;
  p.nvars = 2;
  p.rows = {{1, -1}};
  p.rhs = {0};
  p.cost = {-1, 0};
  CHECK(simplex_solve(p).status == LpSolution::Status::Unbounded);
}

TEST_CASE("simplex drops redundant equality rows") {
  LpProblem p;
  p.nvars = 2;
  p.rows = {{1, 1}, {2, 2}, {1, 0}};  // row 2 = 2 x row 1
  p.rhs = {3, 6, 1};
  p.cost = {1, 1};
  auto s = simplex_solve(p);
  REQUIRE(s.status == LpSolution::Status::Optimal);
  CHECK(s.value == doctest::Approx(3.0));
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(2.0));
}

TEST_CASE("simplex solves a transportation problem") {
  // Supplies (0.5, 0.5), demands (0.5, 0.5), cost = Hamming: optimum 0 on
  // the diagonal; with cost forcing mass off-diagonal, optimum is 1.
  LpProblem p;
  p.nvars = 4;  // x00 x01 x10 x11
  p.rows = {{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}};
  p.rhs = {0.5, 0.5, 0.5, 0.5};
  p.cost = {0, 1, 1, 0};
  auto s = simplex_solve(p);
  REQUIRE(s.status == LpSolution::Status::Optimal);
  CHECK(s.value == doctest::Approx(0.0));
  p.cost = {1, 0, 0, 1};
  s = simplex_solve(p);
  REQUIRE(s.status == LpSolution::Status::Optimal);
  CHECK(s.value == doctest::Approx(0.0));  // all mass on anti-diagonal
  p.cost = {1, 1, 1, 1};
  s = simplex_solve(p);
  CHECK(s.value == doctest::Approx(1.0));  // total mass is 1 either way
}

TEST_CASE("simplex handles a degenerate vertex without cycling") {
  // Multiple basic solutions share the vertex (0,0,1).
  LpProblem p;
  p.nvars = 3;
  p.rows = {{1, 1, 1}, {1, 1, 0}};
  p.rhs = {1, 0};
  p.cost = {0, 0, 1};
  auto s = simplex_solve(p);
  REQUIRE(s.status == LpSolution::Status::Optimal);
  CHECK(s.value == doctest::Approx(1.0));
}
