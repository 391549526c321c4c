#include <cmath>

#include "doctest.h"
#include "mdpdesign/errors.hpp"
#include "mdpdesign/linear_solver.hpp"
#include "test_support.hpp"

using namespace mdpdesign;
using namespace testsupport;

namespace {

// Checks the optimality certificate of an LP result: primal feasibility, sign
// of row multipliers and reduced costs, complementary slackness, zero gap.
void check_certificate(const LpModel& lp, const SolveResult& r, double tol = 1e-7) {
  REQUIRE(r.optimal());
  CHECK(max_primal_violation(lp, r.primal) <= tol);
  const double dir = lp.sense == Sense::Minimize ? 1.0 : -1.0;  // dir * objective is minimized
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    const double y = dir * r.dual[i];  // multiplier of the equivalent minimization
    if (row.rel == Relation::LessEqual) CHECK(y <= tol);
    if (row.rel == Relation::GreaterEqual) CHECK(y >= -tol);
    double activity = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) activity += row.coeffs[j] * r.primal[j];
    CHECK(std::abs(y * (activity - row.rhs)) <= tol * (1.0 + std::abs(row.rhs)));
    dual_obj += r.dual[i] * row.rhs;
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    double d = lp.objective[j];
    for (std::size_t i = 0; i < lp.num_rows(); ++i) d -= r.dual[i] * lp.rows[i].coeffs[j];
    CHECK(std::abs(d - r.reduced_costs[j]) <= 1e-7 * (1.0 + std::abs(lp.objective[j])));
    const double dm = dir * d;
    const auto [lo, up] = lp.bounds[j];
    const bool at_lo = std::isfinite(lo) && std::abs(r.primal[j] - lo) <= 1e-7;
    const bool at_up = std::isfinite(up) && std::abs(r.primal[j] - up) <= 1e-7;
    if (dm > tol) CHECK(at_lo);
    if (dm < -tol) CHECK(at_up);
    if (at_lo && !at_up) dual_obj += d * lo;
    else if (at_up && !at_lo) dual_obj += d * up;
    else if (at_lo && at_up) dual_obj += d * lo;
  }
  CHECK(std::abs(dual_obj - r.objective) <= 1e-8 * (1.0 + std::abs(r.objective)));
}

LpModel random_bounded_lp(TestRng& rng, int n, int m) {
  LpModel lp;
  lp.sense = rng.coin() ? Sense::Minimize : Sense::Maximize;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = rng.coin(0.3) ? -rng.uniform(0, 5) : 0.0;
    const double up = lo + rng.uniform(1, 8);
    x0[j] = rng.uniform(lo, up);
    lp.add_variable(rng.uniform(-5, 5), {lo, up});
  }
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<std::size_t, double>> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = rng.coin(0.2) ? 0.0 : rng.uniform(-4, 4);
      terms.push_back({static_cast<std::size_t>(j), a});
      act += a * x0[j];
    }
    const int kind = rng.integer(0, 4);
    if (kind == 0) lp.add_row(terms, Relation::Equal, act);
    else if (kind <= 2) lp.add_row(terms, Relation::LessEqual, act + rng.uniform(0, 3));
    else lp.add_row(terms, Relation::GreaterEqual, act - rng.uniform(0, 3));
  }
  return lp;
}

}  // namespace

TEST_CASE("single-constraint MDP LP: max v s.t. v <= 1 + 0.9 v") {
  LpModel lp;
  lp.sense = Sense::Maximize;
  lp.add_variable(1.0, {-kInfinity, kInfinity});
  lp.add_row({{0, 0.1}}, Relation::LessEqual, 1.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.primal[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.objective == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.dual[0] == doctest::Approx(10.0).epsilon(1e-12));
  check_certificate(lp, r);
}

TEST_CASE("equality with zero objective") {
  LpModel lp;
  lp.add_variable(0.0, {});
  lp.add_row({{0, 1.0}}, Relation::Equal, 1.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.primal[0] == doctest::Approx(1.0));
  CHECK(r.objective == 0.0);
}

TEST_CASE("infeasible and unbounded statuses") {
  LpModel infeasible;
  infeasible.add_variable(1.0, {});
  infeasible.add_row({{0, 1.0}}, Relation::GreaterEqual, 2.0);
  infeasible.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  CHECK(solve_lp(infeasible).status == SolveStatus::Infeasible);

  LpModel unbounded;
  unbounded.sense = Sense::Maximize;
  unbounded.add_variable(1.0, {});
  unbounded.add_variable(-1.0, {});
  unbounded.add_row({{0, 1.0}, {1, -1.0}}, Relation::GreaterEqual, 0.0);
  CHECK(solve_lp(unbounded).status == SolveStatus::Unbounded);

  LpModel free_unbounded;
  free_unbounded.add_variable(1.0, {-kInfinity, kInfinity});
  CHECK(solve_lp(free_unbounded).status == SolveStatus::Unbounded);
}

TEST_CASE("bounds of every shape") {
  LpModel lp;
  lp.sense = Sense::Minimize;
  lp.add_variable(1.0, {-3.0, 5.0});         // raising x0 lowers x3 by as much, so x0 goes to 5
  lp.add_variable(-1.0, {-kInfinity, 2.0});  // upper-only, goes to 2
  lp.add_variable(1.0, {4.0, 4.0});          // fixed
  lp.add_variable(2.0, {-kInfinity, kInfinity});
  lp.add_row({{3, 1.0}, {0, 1.0}}, Relation::GreaterEqual, -1.0);  // x3 >= -1 - x0
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.primal[0] == doctest::Approx(5.0));
  CHECK(r.primal[1] == doctest::Approx(2.0));
  CHECK(r.primal[2] == doctest::Approx(4.0));
  CHECK(r.primal[3] == doctest::Approx(-6.0));
  check_certificate(lp, r);
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
  // min -3/4 x4 + 20 x5 - 1/2 x6 + 6 x7
  LpModel lp;
  for (double c : {-0.75, 20.0, -0.5, 6.0}) lp.add_variable(c, {});
  lp.add_row({{0, 0.25}, {1, -8.0}, {2, -1.0}, {3, 9.0}}, Relation::LessEqual, 0.0);
  lp.add_row({{0, 0.5}, {1, -12.0}, {2, -0.5}, {3, 3.0}}, Relation::LessEqual, 0.0);
  lp.add_row({{2, 1.0}}, Relation::LessEqual, 1.0);
  LpOptions opt;
  opt.degeneracy_streak = 1;
  const auto r = solve_lp(lp, opt);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(-1.25));
  check_certificate(lp, r);
  CHECK(solve_lp(lp).objective == doctest::Approx(-1.25));
}

TEST_CASE("iteration limit is reported") {
  // Two pivots are needed: each row bounds one variable.
  LpModel lp;
  lp.sense = Sense::Maximize;
  lp.add_variable(1.0, {});
  lp.add_variable(1.0, {});
  lp.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  lp.add_row({{1, 1.0}}, Relation::LessEqual, 1.0);
  LpOptions opt;
  opt.iteration_limit = 1;
  CHECK(solve_lp(lp, opt).status == SolveStatus::IterationLimit);
  CHECK(solve_lp(lp).objective == doctest::Approx(2.0));
}

TEST_CASE("random bounded LPs match vertex enumeration and carry a certificate") {
  TestRng rng(20240601);
  int solved = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = rng.integer(1, 3);
    const int m = rng.integer(0, 4);
    const auto lp = random_bounded_lp(rng, n, m);
    const auto oracle = vertex_enumeration(lp);
    REQUIRE(oracle.feasible);  // built around a feasible point
    const auto r = solve_lp(lp);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-7));
    check_certificate(lp, r);
    ++solved;
  }
  CHECK(solved == 300);
}

TEST_CASE("LP results are deterministic") {
  TestRng rng(99);
  const auto lp = random_bounded_lp(rng, 5, 5);
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  CHECK(a.primal == b.primal);
  CHECK(a.dual == b.dual);
  CHECK(a.stats.iterations == b.stats.iterations);
}

TEST_CASE("model validation") {
  LpModel lp;
  lp.add_variable(1.0, {2.0, 1.0});
  CHECK_THROWS_AS(lp.validate(), InvariantError);
  MipModel mip;
  mip.lp.add_variable(1.0, {0.0, 2.0});
  mip.integrality = {VarKind::Binary};
  CHECK_THROWS_AS(mip.validate(), InvariantError);
}

TEST_CASE("knapsack: max 3a + 2b, a + b <= 1, binary") {
  MipModel mip;
  mip.lp.sense = Sense::Maximize;
  mip.lp.add_variable(3.0, {0.0, 1.0});
  mip.lp.add_variable(2.0, {0.0, 1.0});
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 1.0);
  mip.integrality = {VarKind::Binary, VarKind::Binary};
  const auto r = solve_mip(mip);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.primal[0] == doctest::Approx(1.0));
  CHECK(r.primal[1] == doctest::Approx(0.0));
}

TEST_CASE("integral relaxation is solved at the root") {
  MipModel mip;
  mip.lp.add_variable(1.0, {0.0, 5.0});
  mip.lp.add_variable(1.0, {0.0, 5.0});
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Relation::GreaterEqual, 3.0);
  mip.integrality = {VarKind::Integer, VarKind::Integer};
  const auto r = solve_mip(mip);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.stats.nodes == 1);
}

TEST_CASE("MIP infeasibility, node limit and unbounded integer columns") {
  MipModel infeasible;
  infeasible.lp.add_variable(1.0, {0.0, 1.0});
  infeasible.lp.add_row({{0, 2.0}}, Relation::Equal, 1.0);
  infeasible.integrality = {VarKind::Integer};
  CHECK(solve_mip(infeasible).status == SolveStatus::Infeasible);

  MipModel open;
  open.lp.add_variable(1.0, {0.0, kInfinity});
  open.integrality = {VarKind::Integer};
  CHECK_THROWS_AS(solve_mip(open), InvariantError);

  TestRng rng(3);
  MipModel hard;
  hard.lp.sense = Sense::Maximize;
  std::vector<std::pair<std::size_t, double>> row;
  for (int j = 0; j < 12; ++j) {
    hard.lp.add_variable(rng.uniform(1, 2), {0.0, 1.0});
    hard.integrality.push_back(VarKind::Binary);
    row.push_back({static_cast<std::size_t>(j), rng.uniform(1, 2)});
  }
  hard.lp.add_row(row, Relation::LessEqual, 7.3);
  MipOptions opt;
  opt.node_limit = 2;
  const auto r = solve_mip(hard, opt);
  CHECK(r.status == SolveStatus::NodeLimit);
}

TEST_CASE("random binary MIPs match exhaustive enumeration") {
  TestRng rng(777);
  for (int t = 0; t < 60; ++t) {
    MipModel mip;
    mip.lp.sense = rng.coin() ? Sense::Minimize : Sense::Maximize;
    const int nb = rng.integer(1, 8);
    const int nc = rng.integer(0, 2);
    for (int j = 0; j < nb; ++j) {
      mip.lp.add_variable(rng.uniform(-5, 5), {0.0, 1.0});
      mip.integrality.push_back(VarKind::Binary);
    }
    for (int j = 0; j < nc; ++j) {
      mip.lp.add_variable(rng.uniform(-5, 5), {0.0, rng.uniform(1, 4)});
      mip.integrality.push_back(VarKind::Continuous);
    }
    const int m = rng.integer(1, 3);
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<std::size_t, double>> terms;
      double total = 0.0;
      for (int j = 0; j < nb + nc; ++j) {
        const double a = rng.uniform(0.5, 5);
        terms.push_back({static_cast<std::size_t>(j), a});
        total += a;
      }
      mip.lp.add_row(terms, Relation::LessEqual, rng.uniform(0.2, 0.7) * total);
    }
    const auto oracle = exhaustive_binary_mip(mip);
    const auto r = solve_mip(mip);
    REQUIRE(oracle.feasible);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-7));
    CHECK(max_primal_violation(mip.lp, r.primal) <= 1e-7);
    for (int j = 0; j < nb; ++j) CHECK(std::abs(r.primal[j] - std::round(r.primal[j])) <= 1e-9);
    const auto again = solve_mip(mip);
    CHECK(again.primal == r.primal);
    CHECK(again.stats.nodes == r.stats.nodes);
  }
}

TEST_CASE("general integers: bounded enumeration agrees") {
  TestRng rng(4242);
  for (int t = 0; t < 40; ++t) {
    MipModel mip;
    mip.lp.sense = Sense::Maximize;
    const int n = rng.integer(1, 3);
    std::vector<int> ub(n);
    for (int j = 0; j < n; ++j) {
      ub[j] = rng.integer(1, 4);
      mip.lp.add_variable(rng.uniform(0, 5), {0.0, static_cast<double>(ub[j])});
      mip.integrality.push_back(VarKind::Integer);
    }
    std::vector<std::pair<std::size_t, double>> terms;
    double total = 0.0;
    std::vector<double> a(n);
    for (int j = 0; j < n; ++j) {
      a[j] = rng.uniform(1, 3);
      terms.push_back({static_cast<std::size_t>(j), a[j]});
      total += a[j] * ub[j];
    }
    const double cap = rng.uniform(0.3, 0.8) * total;
    mip.lp.add_row(terms, Relation::LessEqual, cap);
    double best = -INFINITY;
    std::vector<int> x(n, 0);
    while (true) {
      double w = 0.0, v = 0.0;
      for (int j = 0; j < n; ++j) {
        w += a[j] * x[j];
        v += mip.lp.objective[j] * x[j];
      }
      if (w <= cap + 1e-9) best = std::max(best, v);
      int j = 0;
      while (j < n && ++x[j] > ub[j]) x[j++] = 0;
      if (j == n) break;
    }
    const auto r = solve_mip(mip);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("LP text export lists every section") {
  MipModel mip;
  mip.lp.sense = Sense::Maximize;
  mip.lp.add_variable(1.0, {0.0, 1.0}, "a");
  mip.lp.add_variable(2.0, {-kInfinity, kInfinity}, "v");
  mip.lp.add_variable(0.5, {0.0, 3.0}, "n");
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 4.0, "cap");
  mip.integrality = {VarKind::Binary, VarKind::Continuous, VarKind::Integer};
  const auto text = to_lp_format(mip);
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("cap:") != std::string::npos);
  CHECK(text.find("v free") != std::string::npos);
  CHECK(text.find("Binary") != std::string::npos);
  CHECK(text.find("General") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("internal backend is the default engine") {
  CHECK(internal_backend().name() == "internal-bnb");
}
