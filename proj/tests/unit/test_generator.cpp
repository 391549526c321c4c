#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mdpdesign/errors.hpp"
#include "mdpdesign/generator.hpp"
#include "mdpdesign/rng.hpp"
#include "test_support.hpp"

using namespace mdpdesign;

TEST_CASE("counter generator reproduces the reference splitmix64 sequence") {
  // Published outputs of splitmix64 started from state 0.
  CounterRng rng(0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next_u64() == 0x06C45D188009454FULL);
  CHECK(rng.counter() == 3);
}

TEST_CASE("streams are keyed by every coordinate") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = 0; j < 4; ++j)
      for (std::uint64_t k = 0; k < 4; ++k) firsts.insert(CounterRng::stream(7, StreamTag::Transition, i, j, k).next_u64());
  CHECK(firsts.size() == 64);
  CHECK(CounterRng::stream(7, StreamTag::Transition).next_u64() != CounterRng::stream(8, StreamTag::Transition).next_u64());
  CHECK(CounterRng::stream(7, StreamTag::Discount).next_u64() != CounterRng::stream(7, StreamTag::Transition).next_u64());
  auto a = CounterRng::stream(3, StreamTag::LeaderRhs, 1, 2, 3);
  auto b = CounterRng::stream(3, StreamTag::LeaderRhs, 1, 2, 3);
  for (int c = 0; c < 10; ++c) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform and normal draws have the right moments") {
  auto rng = CounterRng::stream(1, StreamTag::RunSeed);
  const int N = 200'000;
  double sum = 0.0, lo = 1.0, hi = 0.0;
  for (int c = 0; c < N; ++c) {
    const double u = rng.uniform();
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / N - 0.5) < 0.005);

  double m1 = 0.0, m2 = 0.0;
  for (int c = 0; c < N; ++c) {
    const double z = rng.normal(3.0, 2.0);
    m1 += z;
    m2 += z * z;
  }
  m1 /= N;
  const double var = m2 / N - m1 * m1;
  CHECK(std::abs(m1 - 3.0) < 0.03);
  CHECK(std::abs(std::sqrt(var) - 2.0) < 0.03);
}

TEST_CASE("GenParams validation") {
  GenParams p;
  CHECK_NOTHROW(p.validate());
  p.n = 21;
  CHECK_THROWS_AS(p.validate(), InvariantError);
  p.n = 20;
  p.num_states = 0;
  CHECK_THROWS_AS(p.validate(), InvariantError);
  p.num_states = 10;
  p.m = -1;
  CHECK_THROWS_AS(p.validate(), InvariantError);
}

TEST_CASE("leader rhs mean") {
  CHECK(leader_rhs_mean(20) == doctest::Approx(20.0 / 13.0).epsilon(1e-15));
  CHECK(leader_rhs_mean(20) == doctest::Approx(1.5385).epsilon(1e-4));
}

TEST_CASE("generated instance has the requested shape and ranges") {
  GenParams p;  // 20, 40, 20, 10, 20
  const auto inst = generate_instance(p);
  const auto& space = inst.design();
  CHECK(space.n1() == 0);
  CHECK(space.n2() == 20);
  CHECK(space.constraints().size() == 40);
  CHECK(inst.design_cost().size() == 20);
  REQUIRE(inst.scenarios().size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& b = space.bounds()[i];
    CHECK(b.lower == 0.0);
    if (i < 10) {
      CHECK(space.integrality()[i] == VarKind::Binary);
      CHECK(b.upper == 1.0);
    } else {
      CHECK(space.integrality()[i] == VarKind::Integer);
      CHECK(b.upper >= 1.0);
      CHECK(b.upper == std::round(b.upper));
      CHECK(std::isfinite(b.upper));
    }
    CHECK(inst.design_cost()[i] >= 10.0);
    CHECK(inst.design_cost()[i] <= 100.0);
  }
  for (const auto& row : space.constraints()) CHECK(row.rel == Relation::LessEqual);
  double q = 0.0;
  for (const auto& mdp : inst.scenarios()) {
    CHECK(mdp.num_states() == 10);
    CHECK(mdp.num_actions() == 20);
    CHECK(mdp.discount() >= 0.92);
    CHECK(mdp.discount() <= 0.97);
    CHECK(mdp.design_dim() == 20);
    q += mdp.probability();
    for (double a : mdp.initial_dist()) CHECK(a > 0.0);
    for (int s = 0; s < 10; ++s)
      for (int a = 0; a < 20; ++a) {
        for (double pr : mdp.transition_row(s, a)) CHECK(pr > 0.0);
        const auto& c = mdp.cost(s, a);
        CHECK(c.g >= 10.0);
        CHECK(c.g <= 40.0);
        CHECK(*std::min_element(c.f.begin(), c.f.end()) >= -1.0);
        CHECK(*std::max_element(c.f.begin(), c.f.end()) <= 1.0);
      }
  }
  CHECK(std::abs(q - 1.0) <= 1e-9);
}

TEST_CASE("generation is deterministic in the seed") {
  GenParams p;
  p.n = 6;
  p.m = 4;
  p.num_scenarios = 3;
  p.num_states = 3;
  p.num_actions = 2;
  const auto a = generate_instance(p);
  CHECK(generate_instance(p) == a);
  p.seed = 2;
  const auto b = generate_instance(p);
  CHECK(b.design().constraints() != a.design().constraints());
}

TEST_CASE("leader coefficients and rhs follow their normal laws") {
  // Pool many small instances; coefficient ~ N(12, 0.5), rhs ~ N(b, b/6).
  GenParams p;
  p.n = 8;
  p.m = 10;
  p.num_scenarios = 1;
  p.num_states = 1;
  p.num_actions = 1;
  std::vector<double> coeffs, rhs;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    p.seed = seed;
    const auto inst = generate_instance(p);
    for (const auto& row : inst.design().constraints()) {
      coeffs.insert(coeffs.end(), row.coeffs.begin(), row.coeffs.end());
      rhs.push_back(row.rhs);
    }
  }
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, std::sqrt(s / (v.size() - 1))};
  };
  const auto [cm, cs] = moments(coeffs);
  CHECK(std::abs(cm - 12.0) < 0.01);
  CHECK(std::abs(cs - 0.5) < 0.01);
  const double b = 8.0 / 13.0;
  const auto [rm, rs] = moments(rhs);
  CHECK(std::abs(rm - b) < 0.01);
  CHECK(std::abs(rs - b / 6.0) < 0.01);
}
