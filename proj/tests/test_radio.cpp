#include <cmath>
#include <random>

#include "crn/radio.hpp"
#include "crn/scenario.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace crn;
using crn::testing::close_rel;
using crn::testing::make_scenario;
using crn::testing::reference_interference;

namespace {

// Link 0: (0,0) -> (100,0). Link 1 transmits from 10^(9/4) m above link 0's
// receiver, which delivers exactly 1e-10 W there at 0.1 W.
Scenario pair_fixture() {
  const double d = std::pow(10.0, 9.0 / 4.0);
  return make_scenario(crn::testing::flat_params(1000.0, 2, 16),
                       {{{0, 0}, {0, 1}}, {{100, 0}, {0, 1}}, {{100, d}, {0, 1}}, {{100, d + 50}, {0, 1}}},
                       {{0, 1}, {2, 3}});
}

Scenario random_world(std::uint64_t seed, std::uint32_t flows) {
  ScenarioParams p;
  p.n_flows = flows;
  p.seed = seed;
  return generate_scenario(p);
}

Strategy random_strategy(const Scenario& sc, LinkId l, std::mt19937_64& rng) {
  const auto& ch = sc.links[l].channels;
  std::uniform_int_distribution<std::size_t> pick(0, ch.size() * (sc.params.q_levels - 1));
  const std::size_t k = pick(rng);
  if (k == 0) return Strategy::off();
  return {static_cast<std::uint32_t>(1 + (k - 1) % (sc.params.q_levels - 1)),
          ch[(k - 1) / (sc.params.q_levels - 1)]};
}

void check_cache(const Scenario& sc, const NetworkState& state, double rel) {
  for (LinkId l = 0; l < sc.links.size(); ++l)
    for (ChannelId c = 0; c < sc.params.n_channels; ++c) {
      const double want = reference_interference(sc, state.strategies(), l, c);
      const double got = state.interference(l, c);
      if (!close_rel(got, want, rel)) {
        FAIL_CHECK("link " << l << " channel " << c << ": cached " << got << " vs " << want);
        return;
      }
    }
}

}  // namespace

TEST_CASE("path gain") {
  CHECK(path_gain(100.0, 4.0) == doctest::Approx(1e-8).epsilon(1e-14));
  CHECK(path_gain(10.0, 2.0) == doctest::Approx(1e-2).epsilon(1e-14));
  CHECK(std::isinf(path_gain(0.0, 4.0)));
  CHECK_THROWS_AS(path_gain(-1.0, 4.0), std::invalid_argument);
}

TEST_CASE("power levels") {
  const Scenario sc = pair_fixture();
  const RadioModel model(sc);
  CHECK(model.power(0) == 0.0);
  CHECK(model.power(15) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(model.power(3) == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("SINR examples") {
  const Scenario sc = pair_fixture();
  const RadioModel model(sc);
  NetworkState state(model);

  state.apply(0, {15, 0});
  CHECK(state.sinr(0) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(state.is_active(0));  // exactly at the threshold

  state.apply(1, {15, 0});
  CHECK(state.interference(0, 0) == doctest::Approx(1e-10).epsilon(1e-9));
  CHECK(state.sinr(0) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_FALSE(state.is_active(0));

  state.apply(1, {15, 1});  // other channel: no interference
  CHECK(state.sinr(0) == doctest::Approx(10.0).epsilon(1e-9));

  state.apply(1, Strategy::off());
  CHECK(state.interference(0, 0) == 0.0);
  state.apply(0, Strategy::off());
  CHECK(state.sinr(0) == 0.0);
  CHECK_FALSE(state.is_active(0));
}

TEST_CASE("co-located transmitter blocks the receiver") {
  // two-hop flow: link 1 transmits from link 0's receiver
  const Scenario sc = make_scenario(crn::testing::flat_params(), {{{0, 0}, {0}}, {{50, 0}, {0}}, {{100, 0}, {0}}},
                                    {{0, 1, 2}});
  const RadioModel model(sc);
  NetworkState state(model);
  state.apply(0, {1, 0});
  CHECK(state.is_active(0));
  state.apply(1, {1, 0});
  CHECK(std::isinf(state.interference(0, 0)));
  CHECK(state.sinr(0) == 0.0);
  CHECK_FALSE(state.is_active(0));
  CHECK(state.is_active(1));
  state.apply(1, Strategy::off());
  CHECK(state.interference(0, 0) == 0.0);
  CHECK(state.is_active(0));
}

TEST_CASE("invalid strategies are rejected") {
  const Scenario sc = make_scenario(crn::testing::flat_params(1000.0, 3, 4),
                                    {{{0, 0}, {0, 2}}, {{50, 0}, {0, 1}}}, {{0, 1}});
  const RadioModel model(sc);
  NetworkState state(model);
  CHECK_THROWS_AS(state.apply(0, {1, 2}), InvalidStrategyError);  // not shared by the endpoints
  CHECK_THROWS_AS(state.apply(0, {4, 0}), InvalidStrategyError);  // level beyond Q-1
  CHECK_THROWS_AS(state.apply(0, {0, 0}), InvalidStrategyError);  // OFF with a channel
  CHECK_THROWS_AS(state.apply(1, {1, 0}), InvalidStrategyError);  // unknown link
  CHECK_NOTHROW(state.apply(0, {3, 0}));
  CHECK(state.strategy(0) == Strategy{3, 0});
}

TEST_CASE("apply then revert restores every cached sum") {
  const Scenario sc = random_world(21, 20);
  const RadioModel model(sc);
  NetworkState state(model);
  std::mt19937_64 rng(1);
  for (LinkId l = 0; l < sc.links.size(); ++l) state.apply(l, random_strategy(sc, l, rng));

  std::vector<double> before;
  for (LinkId l = 0; l < sc.links.size(); ++l)
    for (ChannelId c = 0; c < sc.params.n_channels; ++c) before.push_back(state.interference(l, c));

  for (int k = 0; k < 50; ++k) {
    const LinkId l = static_cast<LinkId>(rng() % sc.links.size());
    const Strategy old = state.strategy(l);
    state.apply(l, random_strategy(sc, l, rng));
    state.apply(l, old);
  }
  std::size_t i = 0;
  for (LinkId l = 0; l < sc.links.size(); ++l)
    for (ChannelId c = 0; c < sc.params.n_channels; ++c, ++i)
      REQUIRE(close_rel(state.interference(l, c), before[i], 1e-12));
}

TEST_CASE("cache matches from-scratch sums under random mutation") {
  const Scenario sc = random_world(22, 40);
  const RadioModel model(sc);
  NetworkState state(model);
  std::mt19937_64 rng(2);
  for (int k = 1; k <= 1000; ++k) {
    const LinkId l = static_cast<LinkId>(rng() % sc.links.size());
    state.apply(l, random_strategy(sc, l, rng));
    if (k % 100 == 0) check_cache(sc, state, 1e-9);
  }
  // turning everything off leaves nothing behind
  for (LinkId l = 0; l < sc.links.size(); ++l) state.apply(l, Strategy::off());
  for (LinkId l = 0; l < sc.links.size(); ++l)
    for (ChannelId c = 0; c < sc.params.n_channels; ++c) REQUIRE(state.interference(l, c) == 0.0);
}

TEST_CASE("SINR is monotone in own and interfering power") {
  const Scenario sc = random_world(23, 30);
  const RadioModel model(sc);
  NetworkState state(model);
  std::mt19937_64 rng(3);
  for (LinkId l = 0; l < sc.links.size(); ++l) state.apply(l, random_strategy(sc, l, rng));

  for (int k = 0; k < 200; ++k) {
    const LinkId l = static_cast<LinkId>(rng() % sc.links.size());
    const Strategy s = state.strategy(l);
    if (s.is_off() || s.power_level + 1 >= sc.params.q_levels) continue;
    std::vector<double> others;
    for (LinkId m = 0; m < sc.links.size(); ++m) others.push_back(state.sinr(m));
    const double own = state.sinr(l);
    state.apply(l, {s.power_level + 1, s.channel});
    CHECK(state.sinr(l) >= own);
    for (LinkId m = 0; m < sc.links.size(); ++m)
      if (m != l) CHECK(state.sinr(m) <= others[m] * (1 + 1e-12));
  }
}

TEST_CASE("scaling every power and the noise leaves SINR unchanged") {
  Scenario sc = random_world(24, 20);
  Scenario scaled = sc;
  scaled.params.p_max *= 1000.0;
  scaled.params.noise_power *= 1000.0;
  const RadioModel a(sc), b(scaled);
  NetworkState sa(a), sb(b);
  std::mt19937_64 rng(4);
  for (LinkId l = 0; l < sc.links.size(); ++l) {
    const Strategy s = random_strategy(sc, l, rng);
    sa.apply(l, s);
    sb.apply(l, s);
  }
  for (LinkId l = 0; l < sc.links.size(); ++l) {
    CHECK(close_rel(sb.sinr(l), sa.sinr(l), 1e-12));
    CHECK(sb.is_active(l) == sa.is_active(l));
  }
}

TEST_CASE("flow profiles") {
  const Scenario sc = random_world(25, 5);
  const RadioModel model(sc);
  NetworkState state(model);
  const Flow& f = sc.flows[0];
  CHECK(state.flow_off(f.id));
  CHECK_FALSE(state.flow_active(f.id));
  FlowProfile prof;
  for (LinkId l : f.links) prof.push_back({1, sc.links[l].channels.front()});
  state.apply_flow(f.id, prof);
  CHECK(state.flow_profile(f.id) == prof);
  CHECK_FALSE(state.flow_off(f.id));
  CHECK_THROWS(state.apply_flow(f.id, FlowProfile(f.links.size() + 1)));
}
