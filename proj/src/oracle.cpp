#include "crn/oracle.hpp"

#include <cmath>
#include <random>
#include <string>

namespace crn::oracle {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

// Odometer over the strategy lists of `links`, writing into `profile`.
// Returns false once every combination has been visited.
bool advance(Profile& profile, const std::vector<LinkId>& links, const std::vector<std::vector<Strategy>>& spaces,
             std::vector<std::size_t>& digits) {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (++digits[i] < spaces[i].size()) {
      profile[links[i]] = spaces[i][digits[i]];
      return true;
    }
    digits[i] = 0;
    profile[links[i]] = spaces[i][0];
  }
  return false;
}

}  // namespace

std::vector<Strategy> link_strategies(const Scenario& scenario, LinkId link) {
  std::vector<Strategy> out{Strategy::off()};
  for (ChannelId c : scenario.links.at(link).channels)
    for (std::uint32_t q = 1; q < scenario.params.q_levels; ++q) out.push_back({q, c});
  return out;
}

double sinr(const Scenario& sc, const Profile& profile, LinkId link) {
  const Strategy& own = profile.at(link);
  if (own.is_off()) return 0.0;
  const ScenarioParams& p = sc.params;
  auto power = [&](std::uint32_t q) { return q * p.p_max / (p.q_levels - 1); };
  const Position& rx = sc.nodes[sc.links[link].rx].position;
  double interference = 0.0;
  for (LinkId m = 0; m < sc.links.size(); ++m) {
    if (m == link || profile[m].is_off() || profile[m].channel != own.channel) continue;
    const double d = distance(sc.nodes[sc.links[m].tx].position, rx);
    if (d == 0.0) return 0.0;
    interference += power(profile[m].power_level) * std::pow(d, -p.path_loss_exp);
  }
  const double d = distance(sc.nodes[sc.links[link].tx].position, rx);
  return power(own.power_level) * std::pow(d, -p.path_loss_exp) / (p.noise_power + interference);
}

bool link_active(const Scenario& sc, const Profile& profile, LinkId link) {
  return !profile.at(link).is_off() && sinr(sc, profile, link) >= sc.params.sinr_threshold * (1.0 - 1e-12);
}

bool flow_active(const Scenario& sc, const Profile& profile, FlowId flow) {
  for (LinkId l : sc.flows.at(flow).links)
    if (!link_active(sc, profile, l)) return false;
  return true;
}

std::uint32_t active_flows(const Scenario& sc, const Profile& profile) {
  std::uint32_t n = 0;
  for (const Flow& f : sc.flows) n += flow_active(sc, profile, f.id) ? 1 : 0;
  return n;
}

int utility(const Scenario& sc, const Profile& profile, GameKind game, std::uint32_t player) {
  switch (game) {
    case GameKind::LLG:
      if (profile.at(player).is_off()) return 0;
      return link_active(sc, profile, player) ? 1 : -1;
    case GameKind::LFG: {
      if (flow_active(sc, profile, player)) return 1;
      for (LinkId l : sc.flows.at(player).links)
        if (!profile[l].is_off()) return -1;
      return 0;
    }
    case GameKind::PFG: return static_cast<int>(active_flows(sc, profile));
    case GameKind::CLG: break;
  }
  throw std::invalid_argument("oracle: CLG is not a one-shot game with a single utility");
}

std::uint64_t joint_space_size(const Scenario& sc) {
  std::uint64_t n = 1;
  for (LinkId l = 0; l < sc.links.size(); ++l) n = saturating_mul(n, link_strategies(sc, l).size());
  return n;
}

Optimum global_optimum(const Scenario& sc) {
  const std::uint64_t size = joint_space_size(sc);
  if (size > kMaxJointProfiles)
    throw GuardError("oracle: joint space of " + std::to_string(size) + " profiles exceeds the guard");

  std::vector<LinkId> links(sc.links.size());
  std::vector<std::vector<Strategy>> spaces;
  for (LinkId l = 0; l < sc.links.size(); ++l) {
    links[l] = l;
    spaces.push_back(link_strategies(sc, l));
  }
  Profile profile(sc.links.size(), Strategy::off());
  std::vector<std::size_t> digits(sc.links.size(), 0);

  Optimum best{active_flows(sc, profile), profile};
  while (advance(profile, links, spaces, digits)) {
    const std::uint32_t v = active_flows(sc, profile);
    if (v > best.max_active) best = {v, profile};
  }
  return best;
}

bool is_pure_nash(const Profile& profile, GameKind game, const Scenario& sc) {
  if (profile.size() != sc.links.size()) throw std::invalid_argument("oracle: profile size mismatch");
  if (game == GameKind::CLG) throw std::invalid_argument("oracle: CLG has no single-utility Nash check");

  std::vector<std::vector<LinkId>> players;
  if (is_flow_game(game)) {
    for (const Flow& f : sc.flows) players.push_back(f.links);
  } else {
    for (LinkId l = 0; l < sc.links.size(); ++l) players.push_back({l});
  }

  for (std::uint32_t player = 0; player < players.size(); ++player) {
    const auto& links = players[player];
    std::vector<std::vector<Strategy>> spaces;
    std::uint64_t size = 1;
    for (LinkId l : links) {
      spaces.push_back(link_strategies(sc, l));
      size = saturating_mul(size, spaces.back().size());
    }
    if (size > kMaxJointProfiles)
      throw GuardError("oracle: deviation space of player " + std::to_string(player) + " exceeds the guard");

    const int current = utility(sc, profile, game, player);
    Profile deviation = profile;
    std::vector<std::size_t> digits(links.size(), 0);
    for (std::size_t i = 0; i < links.size(); ++i) deviation[links[i]] = spaces[i][0];
    do {
      if (utility(sc, deviation, game, player) > current) return false;
    } while (advance(deviation, links, spaces, digits));
  }
  return true;
}

ScenarioParams tiny_params(std::uint64_t seed, std::uint32_t n_flows) {
  ScenarioParams p;
  p.n_nodes = 10;
  p.side_length = 200.0;
  p.region_size = 100.0;
  p.n_channels = 2;
  p.channel_subset_min = 1;
  p.channel_subset_max = 2;
  p.q_levels = 2;
  p.max_hops = 2;
  p.n_flows = n_flows;
  p.seed = seed;
  return p;
}

VerifyReport verify_tiny_instances(std::uint64_t seed, std::uint32_t n_instances) {
  constexpr std::uint64_t kTinyLimit = 1'000'000;
  VerifyReport report;
  std::mt19937_64 seeds(seed);
  auto check = [&](bool ok, std::uint32_t instance, const std::string& what) {
    ++report.checks;
    if (!ok) report.failures.push_back("instance " + std::to_string(instance) + ": " + what);
  };

  for (std::uint32_t attempt = 0; report.instances < n_instances && attempt < 100 * n_instances; ++attempt) {
    const std::uint32_t n_flows = 2 + static_cast<std::uint32_t>(attempt % 2);
    Scenario sc;
    try {
      sc = generate_scenario(tiny_params(seeds(), n_flows));
    } catch (const ScenarioError&) {
      continue;
    }
    if (joint_space_size(sc) > kTinyLimit) continue;
    const std::uint32_t id = report.instances++;

    const RadioModel model(sc);
    for (GameKind game : {GameKind::LLG, GameKind::LFG, GameKind::PFG}) {
      const GameResult r = run_game(model, GameConfig{game, 50, 1'000'000, seed});
      if (r.trajectory.converged)
        check(is_pure_nash(r.final_profile, game, sc), id,
              std::string(to_string(game)) + " terminal profile is not a pure NE");
      for (const MoveRecord& m : r.trajectory.moves)
        check(m.utility_after > m.utility_before, id, std::string(to_string(game)) + " move did not improve");
      if (game == GameKind::PFG) {
        check(r.trajectory.converged, id, "PFG did not converge");
        std::uint32_t last = 0;
        for (const MoveRecord& m : r.trajectory.moves) {
          check(m.potential.has_value() && *m.potential > last, id, "PFG potential not strictly increasing");
          last = m.potential.value_or(last);
        }
      }
    }
    const Optimum opt = global_optimum(sc);
    check(is_pure_nash(opt.witness, GameKind::PFG, sc), id, "global optimum witness is not a PFG NE");

    const GameResult clg = run_game(model, GameConfig{GameKind::CLG, 50, 1'000'000, seed});
    NetworkState terminal(model);
    for (LinkId l = 0; l < sc.links.size(); ++l) terminal.apply(l, clg.final_profile[l]);
    for (const Flow& f : sc.flows)
      check(terminal.flow_active(f.id) || terminal.flow_off(f.id), id, "CLG flow neither fully active nor off");
  }
  if (report.instances < n_instances)
    report.failures.push_back("only " + std::to_string(report.instances) + " tiny instances could be generated");
  return report;
}

}  // namespace crn::oracle
