#include "support.hpp"

#include <doctest.h>

using namespace mefkit;
using namespace mefkit::lp;

namespace {

// Dual objective b'y + sum over bounded columns of the reduced cost at its bound.
double dual_objective(const LinearProgram& prog, const LpSolution& s) {
  double d = 0.0;
  for (int i = 0; i < prog.num_rows(); ++i) d += prog.row(i).rhs * s.duals[i];
  for (int j = 0; j < prog.num_variables(); ++j) {
    const double r = s.reduced_costs[j];
    if (r > 0.0) d += r * prog.lower(j);
    if (r < 0.0) d += r * prog.upper(j);
  }
  return d;
}

}  // namespace

TEST_CASE("single variable lower bound row") {
  LinearProgram p;
  const int x = p.add_variable(1.0);
  p.add_row({{x, 1.0}}, Sense::GreaterEqual, 3.0);
  const LpSolution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.duals[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric degenerate vertex is chosen deterministically") {
  LinearProgram p;
  const int x = p.add_variable(-1.0);
  const int y = p.add_variable(-1.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
  const LpSolution a = solve(p);
  const LpSolution b = solve(p);
  REQUIRE(a.status == Status::Optimal);
  CHECK(a.objective_value == doctest::Approx(-1.0));
  CHECK(a.x == b.x);
  CHECK(a.duals == b.duals);
  CHECK(a.duals[0] <= 0.0);
}

TEST_CASE("infeasible and unbounded are classified") {
  LinearProgram inf;
  const int x = inf.add_variable(1.0, 0.0, 1.0);
  inf.add_row({{x, 1.0}}, Sense::GreaterEqual, 2.0);
  CHECK(solve(inf).status == Status::Infeasible);

  LinearProgram unb;
  const int u = unb.add_variable(-1.0);
  const int v = unb.add_variable(0.0);
  unb.add_row({{u, 1.0}, {v, -1.0}}, Sense::LessEqual, 1.0);
  CHECK(solve(unb).status == Status::Unbounded);
}

TEST_CASE("dual signs follow the minimization convention") {
  // min x + y, x + 2y >= 4, x - y <= 1, x,y in [0,10]
  LinearProgram p;
  const int x = p.add_variable(1.0, 0.0, 10.0);
  const int y = p.add_variable(1.0, 0.0, 10.0);
  p.add_row({{x, 1.0}, {y, 2.0}}, Sense::GreaterEqual, 4.0);
  p.add_row({{x, 1.0}, {y, -1.0}}, Sense::LessEqual, 1.0);
  const LpSolution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective_value == doctest::Approx(2.0));
  CHECK(s.duals[0] == doctest::Approx(0.5));
  CHECK(s.duals[1] <= 0.0);
  CHECK(dual_objective(p, s) == doctest::Approx(s.objective_value).epsilon(1e-12));
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  std::mt19937 rng(4242);
  for (int k = 0; k < 50; ++k) {
    const testkit::DenseLp d = testkit::random_lp(rng);
    const double oracle = testkit::vertex_enumeration(d);
    const LinearProgram prog = testkit::to_program(d);
    const LpSolution s = solve(prog);
    CAPTURE(k);
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective_value - oracle) <= 1e-8 * (1.0 + std::abs(oracle)));
    CHECK(std::abs(s.objective_value - dual_objective(prog, s)) < 1e-7);
    const auto act = prog.row_activity(s.x);
    for (int i = 0; i < prog.num_rows(); ++i) {
      const auto& r = prog.row(i);
      const double tol = 1e-8 * (1.0 + std::abs(r.rhs));
      if (r.sense == Sense::LessEqual) CHECK(act[i] <= r.rhs + tol);
      if (r.sense == Sense::GreaterEqual) CHECK(act[i] >= r.rhs - tol);
      if (r.sense == Sense::Equal) CHECK(std::abs(act[i] - r.rhs) <= tol);
      // Complementary slackness.
      CHECK(std::abs(s.duals[i] * (act[i] - r.rhs)) <= 1e-7);
    }
  }
}

TEST_CASE("warm start after a rhs change reuses the basis") {
  LinearProgram p;
  const int a = p.add_variable(10.0, 0.0, 100.0);
  const int b = p.add_variable(30.0, 0.0, 100.0);
  const int row = p.add_row({{a, 1.0}, {b, 1.0}}, Sense::Equal, 50.0);
  SimplexSolver solver(p);
  const LpSolution first = solver.solve();
  REQUIRE(first.status == Status::Optimal);
  CHECK(first.duals[row] == doctest::Approx(10.0));
  SimplexSolver copy = solver;
  copy.set_rhs(row, 150.0);
  const LpSolution second = copy.solve();
  REQUIRE(second.status == Status::Optimal);
  CHECK(second.objective_value == doctest::Approx(100.0 * 10.0 + 50.0 * 30.0));
  CHECK(second.duals[row] == doctest::Approx(30.0));
}

TEST_CASE("degenerate cycling-prone instance terminates") {
  // Beale's example.
  LinearProgram p;
  const int x1 = p.add_variable(-0.75);
  const int x2 = p.add_variable(150.0);
  const int x3 = p.add_variable(-0.02);
  const int x4 = p.add_variable(6.0);
  p.add_row({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, Sense::LessEqual, 0.0);
  p.add_row({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, Sense::LessEqual, 0.0);
  p.add_row({{x3, 1.0}}, Sense::LessEqual, 1.0);
  const LpSolution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective_value == doctest::Approx(-0.05));
}

TEST_CASE("dump lists objective, rows and bounds") {
  LinearProgram p;
  const int x = p.add_variable(2.0, -kInf, kInf, "x");
  const int y = p.add_variable(-1.0, 0.0, 4.0, "y");
  p.add_row({{x, 1.0}, {y, 1.0}}, Sense::GreaterEqual, 1.0, "cover");
  const std::string d = p.dump();
  CHECK(d.find("MINIMIZE") != std::string::npos);
  CHECK(d.find("cover") != std::string::npos);
  CHECK(d.find("x free") != std::string::npos);
  CHECK(d.find("END") != std::string::npos);
}

TEST_CASE("validate rejects crossed bounds and dangling terms") {
  LinearProgram p;
  p.add_variable(1.0, 2.0, 5.0);
  p.add_row({{3, 1.0}}, Sense::LessEqual, 1.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  LinearProgram q;
  q.add_variable(1.0, 0.0, 5.0);
  q.set_bounds(0, 3.0, 1.0);
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
