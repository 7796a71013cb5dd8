#include <random>

#include "crn/games.hpp"
#include "crn/oracle.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace crn;
using crn::testing::flat_params;
using crn::testing::make_scenario;

TEST_CASE("global optimum examples") {
  SUBCASE("no flows") {
    const Scenario sc = make_scenario(flat_params(), {{{0, 0}, {0}}}, {});
    CHECK(oracle::global_optimum(sc).max_active == 0);
  }
  SUBCASE("one isolated flow") {
    const Scenario sc = make_scenario(flat_params(), {{{0, 0}, {0}}, {{50, 0}, {0}}}, {{0, 1}});
    const auto opt = oracle::global_optimum(sc);
    CHECK(opt.max_active == 1);
    CHECK(oracle::flow_active(sc, opt.witness, 0));
  }
  SUBCASE("two flows that jam each other on the only channel") {
    // B transmits 14 m from A's receiver, A transmits 14 m from B's
    const Scenario sc = make_scenario(flat_params(),
                                      {{{0, 0}, {0}}, {{90, 0}, {0}}, {{100, 10}, {0}}, {{10, 10}, {0}}},
                                      {{0, 1}, {2, 3}});
    CHECK(oracle::active_flows(sc, {Strategy{1, 0}, Strategy::off()}) == 1);
    CHECK(oracle::active_flows(sc, {Strategy::off(), Strategy{1, 0}}) == 1);
    CHECK(oracle::active_flows(sc, {Strategy{1, 0}, Strategy{1, 0}}) == 0);
    CHECK(oracle::global_optimum(sc).max_active == 1);
  }
  SUBCASE("a second channel separates them") {
    const Scenario sc = make_scenario(flat_params(1000.0, 2),
                                      {{{0, 0}, {0, 1}}, {{90, 0}, {0, 1}}, {{100, 10}, {0, 1}}, {{10, 10}, {0, 1}}},
                                      {{0, 1}, {2, 3}});
    CHECK(oracle::global_optimum(sc).max_active == 2);
  }
}

TEST_CASE("oracle SINR matches the cached engine") {
  ScenarioParams p;
  p.n_flows = 25;
  p.seed = 77;
  const Scenario sc = generate_scenario(p);
  const RadioModel model(sc);
  NetworkState state(model);
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    for (LinkId l = 0; l < sc.links.size(); ++l) {
      if (rng() % 3) continue;
      const auto space = oracle::link_strategies(sc, l);
      state.apply(l, space[rng() % space.size()]);
    }
    for (LinkId l = 0; l < sc.links.size(); ++l) {
      CHECK(crn::testing::close_rel(state.sinr(l), oracle::sinr(sc, state.strategies(), l), 1e-9));
      CHECK(state.is_active(l) == oracle::link_active(sc, state.strategies(), l));
    }
    CHECK(state.active_flows() == oracle::active_flows(sc, state.strategies()));
  }
}

TEST_CASE("pure Nash checks") {
  const Scenario sc = make_scenario(flat_params(),
                                    {{{0, 0}, {0}}, {{90, 0}, {0}}, {{100, 10}, {0}}, {{10, 10}, {0}}},
                                    {{0, 1}, {2, 3}});
  const oracle::Profile silent(2, Strategy::off());
  const oracle::Profile one{Strategy{1, 0}, Strategy::off()};
  const oracle::Profile both{Strategy{1, 0}, Strategy{1, 0}};

  // everyone silent: either flow can come up alone
  CHECK_FALSE(oracle::is_pure_nash(silent, GameKind::LFG, sc));
  CHECK_FALSE(oracle::is_pure_nash(silent, GameKind::PFG, sc));
  CHECK_FALSE(oracle::is_pure_nash(silent, GameKind::LLG, sc));

  CHECK(oracle::is_pure_nash(one, GameKind::LFG, sc));
  CHECK(oracle::is_pure_nash(one, GameKind::PFG, sc));
  CHECK(oracle::is_pure_nash(one, GameKind::LLG, sc));

  // both transmitting and failing: turning off is better for each
  CHECK_FALSE(oracle::is_pure_nash(both, GameKind::LFG, sc));
  CHECK_THROWS_AS(oracle::is_pure_nash(both, GameKind::CLG, sc), std::invalid_argument);
  CHECK_THROWS_AS(oracle::utility(sc, both, GameKind::CLG, 0), std::invalid_argument);
}

TEST_CASE("guard on oversized joint spaces") {
  ScenarioParams p;
  p.n_flows = 10;
  p.seed = 3;
  const Scenario sc = generate_scenario(p);
  CHECK(oracle::joint_space_size(sc) > oracle::kMaxJointProfiles);
  CHECK_THROWS_AS(oracle::global_optimum(sc), oracle::GuardError);
}

TEST_CASE("tiny instance verification") {
  const auto report = oracle::verify_tiny_instances(3, 10);
  for (const auto& f : report.failures) MESSAGE(f);
  CHECK(report.instances == 10);
  CHECK(report.checks > 30);
  CHECK(report.ok());
}
