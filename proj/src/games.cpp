#include "crn/games.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace crn {

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::LLG: return "LLG";
    case GameKind::LFG: return "LFG";
    case GameKind::PFG: return "PFG";
    case GameKind::CLG: return "CLG";
  }
  return "?";
}

GameKind parse_game_kind(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (GameKind k : kAllGames)
    if (to_string(k) == upper) return k;
  throw std::invalid_argument("unknown game '" + std::string(name) + "' (expected llg, lfg, pfg or clg)");
}

std::vector<GameKind> parse_game_list(std::string_view text) {
  std::vector<GameKind> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    out.push_back(parse_game_kind(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Stable: return "stable";
    case Termination::NoProgress: return "no_progress";
    case Termination::MaxCycles: return "max_cycles";
  }
  return "?";
}

void GameConfig::validate() const {
  if (max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
  if (search_node_cap < 1) throw std::invalid_argument("search_node_cap must be >= 1");
}

std::vector<Strategy> strategy_space(const DirectedLink& link, const ScenarioParams& params) {
  std::vector<Strategy> out;
  out.reserve(1 + link.channels.size() * (params.q_levels - 1));
  out.push_back(Strategy::off());
  for (ChannelId c : link.channels)
    for (std::uint32_t q = 1; q < params.q_levels; ++q) out.push_back({q, c});
  return out;
}

// ---------------------------------------------------------------------------
// Utilities

int llg_utility(const NetworkState& state, LinkId link) {
  if (state.strategy(link).is_off()) return 0;
  return state.is_active(link) ? 1 : -1;
}

int lfg_utility(const NetworkState& state, FlowId flow) {
  if (state.flow_active(flow)) return 1;
  return state.flow_off(flow) ? 0 : -1;
}

std::uint32_t potential(const NetworkState& state) { return state.active_flows(); }

int clg_utility(const NetworkState& state, LinkId link, int phase) {
  if (phase != 1 && phase != 2) throw std::invalid_argument("clg_utility: phase must be 1 or 2");
  if (state.strategy(link).is_off()) return 0;
  const Scenario& sc = state.model().scenario();
  const DirectedLink& me = sc.links.at(link);
  const auto& links = sc.flows[me.flow].links;
  const std::size_t last = phase == 1 ? me.index_in_flow : links.size() - 1;
  for (std::size_t i = 0; i <= last; ++i)
    if (!state.is_active(links[i])) return -1;
  return 1;
}

// ---------------------------------------------------------------------------
// Moves

std::optional<Strategy> llg_move(const NetworkState& state, LinkId link) {
  const int u = llg_utility(state, link);
  if (u == 1) return std::nullopt;
  const RadioModel& model = state.model();
  const Scenario& sc = model.scenario();
  for (const Strategy& s : strategy_space(sc.links.at(link), sc.params)) {
    if (!s.is_off() && model.meets_threshold(state.sinr_with(link, s))) return s;
  }
  if (u == -1) return Strategy::off();
  return std::nullopt;
}

namespace {

/// Depth-first search for a joint strategy that activates every link of a
/// flow, assigning links in route order against the interference currently
/// in `state`. The flow's links must be OFF on entry.
///
/// A partial assignment is abandoned when an assigned link drops below the
/// threshold, when some unassigned link cannot reach it on any admissible
/// channel even at full power, or when the optional bound rejects it. Each
/// of these only gets worse as more of the flow transmits, so no full
/// activation is lost, and each also gets worse with the power of the link
/// just assigned, so the remaining levels of that channel are skipped.
class ActivationSearch {
 public:
  /// Protected flows whose deactivation counts against the bound.
  struct Bound {
    std::vector<FlowId> protected_flows;
    std::uint32_t max_knocked = 0;  // inclusive
  };

  ActivationSearch(NetworkState& state, FlowId flow, std::uint64_t cap, std::optional<Bound> bound)
      : state_(state), model_(state.model()), links_(model_.scenario().flows.at(flow).links), cap_(cap),
        bound_(std::move(bound)) {
    const Scenario& sc = model_.scenario();
    spaces_.reserve(links_.size());
    for (LinkId l : links_) {
      auto space = strategy_space(sc.links[l], sc.params);
      space.erase(space.begin());  // drop OFF
      spaces_.push_back(std::move(space));
    }
    top_level_ = sc.params.q_levels - 1;
  }

  /// On success the state holds the activation; otherwise the flow is OFF.
  bool run() {
    if (!future_reachable(0) || !bound_holds()) return false;
    return descend(0);
  }

  [[nodiscard]] const SearchStats& stats() const noexcept { return stats_; }

 private:
  bool descend(std::size_t depth) {
    if (depth == links_.size()) return true;
    const LinkId link = links_[depth];
    ChannelId exhausted = kNoChannel;
    for (const Strategy& s : spaces_[depth]) {
      if (s.channel == exhausted) continue;
      if (stats_.nodes >= cap_) {
        stats_.cap_hit = true;
        return false;
      }
      ++stats_.nodes;
      if (!model_.meets_threshold(state_.sinr_with(link, s))) continue;
      state_.apply(link, s);
      if (earlier_active(depth) && future_reachable(depth + 1) && bound_holds()) {
        if (descend(depth + 1)) return true;
        if (stats_.cap_hit) {
          state_.apply(link, Strategy::off());
          return false;
        }
      } else {
        exhausted = s.channel;
      }
      state_.apply(link, Strategy::off());
    }
    return false;
  }

  bool earlier_active(std::size_t depth) const {
    for (std::size_t i = 0; i < depth; ++i)
      if (!state_.is_active(links_[i])) return false;
    return true;
  }

  bool future_reachable(std::size_t from) const {
    const Scenario& sc = model_.scenario();
    for (std::size_t i = from; i < links_.size(); ++i) {
      const auto& channels = sc.links[links_[i]].channels;
      const bool any = std::any_of(channels.begin(), channels.end(), [&](ChannelId c) {
        return model_.meets_threshold(state_.sinr_with(links_[i], {top_level_, c}));
      });
      if (!any) return false;
    }
    return true;
  }

  bool bound_holds() const {
    if (!bound_) return true;
    std::uint32_t knocked = 0;
    for (FlowId f : bound_->protected_flows) {
      if (!state_.flow_active(f) && ++knocked > bound_->max_knocked) return false;
    }
    return true;
  }

  NetworkState& state_;
  const RadioModel& model_;
  const std::vector<LinkId>& links_;
  std::uint64_t cap_;
  std::optional<Bound> bound_;
  std::vector<std::vector<Strategy>> spaces_;
  std::uint32_t top_level_ = 1;
  SearchStats stats_;
};

FlowProfile all_off(std::size_t k) { return FlowProfile(k, Strategy::off()); }

void record_stats(SearchStats* out, const SearchStats& s) {
  if (out == nullptr) return;
  out->nodes += s.nodes;
  out->cap_hit = out->cap_hit || s.cap_hit;
}

}  // namespace

std::optional<FlowProfile> lfg_move(NetworkState& state, FlowId flow, std::uint64_t node_cap, SearchStats* stats) {
  const int u = lfg_utility(state, flow);
  if (u == 1) return std::nullopt;
  const FlowProfile original = state.flow_profile(flow);
  const std::size_t k = original.size();
  state.apply_flow(flow, all_off(k));

  ActivationSearch search(state, flow, node_cap, std::nullopt);
  std::optional<FlowProfile> result;
  if (search.run()) result = state.flow_profile(flow);
  record_stats(stats, search.stats());
  state.apply_flow(flow, original);

  if (!result && u == -1) result = all_off(k);
  return result;
}

std::optional<FlowProfile> pfg_move(NetworkState& state, FlowId flow, std::uint64_t node_cap, SearchStats* stats) {
  const std::uint32_t current = potential(state);
  const FlowProfile original = state.flow_profile(flow);
  const std::size_t k = original.size();
  state.apply_flow(flow, all_off(k));

  // With the flow silent, every other flow active now is the best that can
  // survive any activation. An activation reaches 1 + |survivors|.
  ActivationSearch::Bound bound;
  for (const Flow& f : state.model().scenario().flows)
    if (f.id != flow && state.flow_active(f.id)) bound.protected_flows.push_back(f.id);
  const auto baseline = static_cast<std::uint32_t>(bound.protected_flows.size());

  std::optional<FlowProfile> result;
  if (1 + baseline > current) {
    bound.max_knocked = 1 + baseline - current - 1;
    ActivationSearch search(state, flow, node_cap, std::move(bound));
    if (search.run()) result = state.flow_profile(flow);
    record_stats(stats, search.stats());
  }
  if (!result && baseline > current) result = all_off(k);
  state.apply_flow(flow, original);
  return result;
}

bool clg_flow_turn(NetworkState& state, FlowId flow, std::uint32_t cycle, std::vector<MoveRecord>* moves) {
  const RadioModel& model = state.model();
  const Scenario& sc = model.scenario();
  const auto& links = sc.flows.at(flow).links;

  std::vector<int> before(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) before[i] = clg_utility(state, links[i], 2);

  auto record = [&](LinkId link, int phase, const Strategy& from, int u_from, int u_to) {
    if (moves == nullptr) return;
    moves->push_back({cycle, link, phase, {from}, {state.strategy(link)}, u_from, u_to, std::nullopt});
  };

  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkId link = links[i];
    const int u = clg_utility(state, link, 1);
    if (u == 1) continue;
    const Strategy old = state.strategy(link);
    bool placed = false;
    for (const Strategy& s : strategy_space(sc.links[link], sc.params)) {
      if (s.is_off() || !model.meets_threshold(state.sinr_with(link, s))) continue;
      state.apply(link, s);
      if (clg_utility(state, link, 1) == 1) {
        placed = true;
        break;
      }
    }
    if (placed) {
      record(link, 1, old, u, 1);
    } else if (u == -1) {
      state.apply(link, Strategy::off());
      record(link, 1, old, u, 0);
    } else {
      state.apply(link, old);
    }
  }

  if (!state.flow_active(flow)) {
    for (LinkId link : links) {
      const Strategy old = state.strategy(link);
      if (old.is_off()) continue;
      state.apply(link, Strategy::off());
      record(link, 2, old, -1, 0);
    }
  }

  for (std::size_t i = 0; i < links.size(); ++i)
    if (clg_utility(state, links[i], 2) > before[i]) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Dynamics

RunMetrics compute_metrics(const NetworkState& state, const Trajectory& t) {
  const Scenario& sc = state.model().scenario();
  RunMetrics m;
  m.game = t.game;
  m.flows_requested = static_cast<std::uint32_t>(sc.flows.size());
  std::size_t links_in_active = 0;
  for (const Flow& f : sc.flows) {
    if (state.flow_active(f.id)) {
      ++m.flows_active;
      links_in_active += f.links.size();
    }
  }
  if (m.flows_active > 0)
    m.mean_links_per_active_flow = static_cast<double>(links_in_active) / static_cast<double>(m.flows_active);
  if (is_flow_game(t.game)) {
    m.normalized_flow_steps = static_cast<double>(t.flow_steps);
  } else if (!sc.flows.empty()) {
    m.normalized_flow_steps = static_cast<double>(t.link_steps) / sc.mean_links_per_flow();
  }
  m.converged = t.converged;
  return m;
}

GameResult run_game(const RadioModel& model, const GameConfig& config) {
  config.validate();
  const Scenario& sc = model.scenario();
  NetworkState state(model);
  Trajectory t;
  t.game = config.game;

  auto note = [&](const SearchStats& s) {
    t.search_nodes += s.nodes;
    t.search_cap_hits += s.cap_hit ? 1 : 0;
  };

  if (sc.flows.empty()) {
    t.converged = true;
  }
  for (std::uint32_t cycle = 1; cycle <= config.max_cycles && !t.converged; ++cycle) {
    bool progressed = false;
    for (const Flow& flow : sc.flows) {
      ++t.flow_steps;
      switch (config.game) {
        case GameKind::LLG:
          for (LinkId link : flow.links) {
            ++t.link_steps;
            if (auto s = llg_move(state, link)) {
              const int u = llg_utility(state, link);
              const Strategy old = state.strategy(link);
              state.apply(link, *s);
              t.moves.push_back({cycle, link, 0, {old}, {*s}, u, llg_utility(state, link), std::nullopt});
              progressed = true;
            }
          }
          break;
        case GameKind::LFG: {
          SearchStats stats;
          if (auto p = lfg_move(state, flow.id, config.search_node_cap, &stats)) {
            const int u = lfg_utility(state, flow.id);
            FlowProfile old = state.flow_profile(flow.id);
            state.apply_flow(flow.id, *p);
            t.moves.push_back({cycle, flow.id, 0, std::move(old), *p, u, lfg_utility(state, flow.id), std::nullopt});
            progressed = true;
          }
          note(stats);
          break;
        }
        case GameKind::PFG: {
          SearchStats stats;
          if (auto p = pfg_move(state, flow.id, config.search_node_cap, &stats)) {
            const auto v = static_cast<int>(potential(state));
            FlowProfile old = state.flow_profile(flow.id);
            state.apply_flow(flow.id, *p);
            const auto after = potential(state);
            t.moves.push_back({cycle, flow.id, 0, std::move(old), *p, v, static_cast<int>(after), after});
            progressed = true;
          }
          note(stats);
          break;
        }
        case GameKind::CLG:
          t.link_steps += flow.links.size();
          progressed = clg_flow_turn(state, flow.id, cycle, &t.moves) || progressed;
          break;
      }
    }
    t.cycles = cycle;
    if (!progressed) {
      t.converged = true;
      t.termination = config.game == GameKind::CLG ? Termination::NoProgress : Termination::Stable;
    }
  }
  if (!t.converged) t.termination = Termination::MaxCycles;

  GameResult result;
  result.metrics = compute_metrics(state, t);
  result.final_profile = state.strategies();
  result.trajectory = std::move(t);
  return result;
}

GameResult run_game(const Scenario& scenario, const GameConfig& config) {
  const RadioModel model(scenario);
  return run_game(model, config);
}

std::string trajectory_to_jsonl(const Trajectory& t) {
  auto profile = [](const FlowProfile& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Strategy& s : p) {
      arr.push_back(s.is_off() ? nlohmann::json::array({0, nullptr}) : nlohmann::json::array({s.power_level, s.channel}));
    }
    return arr;
  };
  std::string out;
  for (const MoveRecord& m : t.moves) {
    nlohmann::ordered_json j = {{"game", to_string(t.game)},
                                {"cycle", m.cycle},
                                {"player", m.player},
                                {"phase", m.phase},
                                {"before", profile(m.before)},
                                {"after", profile(m.after)},
                                {"utility_before", m.utility_before},
                                {"utility_after", m.utility_after}};
    if (m.potential) j["potential"] = *m.potential;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace crn
