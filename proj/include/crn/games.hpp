#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crn/radio.hpp"
#include "crn/scenario.hpp"

namespace crn {

/// LLG: local link game, players are links, each only wants its own link up.
/// LFG: local flow game, players are flows with the +1/-1/0 flow utility.
/// PFG: potential flow game, every flow maximises the number of active flows.
/// CLG: cooperative link game, links of a flow play source to destination.
enum class GameKind { LLG, LFG, PFG, CLG };

inline constexpr GameKind kAllGames[] = {GameKind::LLG, GameKind::LFG, GameKind::PFG, GameKind::CLG};

std::string_view to_string(GameKind kind);
/// Case-insensitive; throws std::invalid_argument for unknown names.
GameKind parse_game_kind(std::string_view name);
std::vector<GameKind> parse_game_list(std::string_view comma_separated);
constexpr bool is_flow_game(GameKind kind) { return kind == GameKind::LFG || kind == GameKind::PFG; }

struct GameConfig {
  GameKind game = GameKind::CLG;
  std::uint32_t max_cycles = 50;
  std::uint64_t search_node_cap = 1'000'000;
  std::uint64_t seed = 0;  // recorded for provenance; the dynamics are deterministic

  void validate() const;
};

/// OFF first, then every (channel, level) with channels ascending and levels
/// 1..Q-1 ascending within a channel.
std::vector<Strategy> strategy_space(const DirectedLink& link, const ScenarioParams& params);

// Utilities. All take the live state; none mutate it.
int llg_utility(const NetworkState& state, LinkId link);
int lfg_utility(const NetworkState& state, FlowId flow);
/// Number of active flows: the potential V and every PFG player's utility.
std::uint32_t potential(const NetworkState& state);
/// phase 1: own link plus every earlier link of the flow must be up.
/// phase 2: the whole flow must be up.
int clg_utility(const NetworkState& state, LinkId link, int phase);

/// Per-move backtracking budget and what was spent.
struct SearchStats {
  std::uint64_t nodes = 0;
  bool cap_hit = false;
};

/// Better response of a link in the local link game, or nullopt if none.
std::optional<Strategy> llg_move(const NetworkState& state, LinkId link);

/// Better response of a flow in the local flow game. `state` is restored
/// before returning; nullopt means no improving joint strategy was found.
std::optional<FlowProfile> lfg_move(NetworkState& state, FlowId flow, std::uint64_t node_cap,
                                    SearchStats* stats = nullptr);

/// Better response of a flow in the potential flow game over the candidates
/// {all-OFF} and full activations of the flow. `state` is restored.
std::optional<FlowProfile> pfg_move(NetworkState& state, FlowId flow, std::uint64_t node_cap,
                                    SearchStats* stats = nullptr);

struct MoveRecord {
  std::uint32_t cycle = 0;
  std::uint32_t player = 0;  // flow id for flow games, link id for link games
  int phase = 0;             // CLG: 1 or 2; otherwise 0
  FlowProfile before;
  FlowProfile after;
  int utility_before = 0;
  int utility_after = 0;
  std::optional<std::uint32_t> potential;  // PFG only: potential after the move
};

/// One CLG flow turn: phase 1 for each link in route order, then the phase-2
/// rollback. Returns whether any link of the flow ends with a higher phase-2
/// utility than it started with. Appends one record per changed link to
/// `moves` if non-null.
bool clg_flow_turn(NetworkState& state, FlowId flow, std::uint32_t cycle = 0,
                   std::vector<MoveRecord>* moves = nullptr);

enum class Termination {
  Stable,      // a whole round-robin cycle without a strategy change
  NoProgress,  // CLG: a whole cycle in which no link improved its utility
  MaxCycles,
};

std::string_view to_string(Termination t);

struct Trajectory {
  GameKind game = GameKind::CLG;
  std::vector<MoveRecord> moves;
  std::uint64_t link_steps = 0;  // link-game player turns
  std::uint64_t flow_steps = 0;  // flow-game player turns; link games: flow turns
  std::uint32_t cycles = 0;
  bool converged = false;
  Termination termination = Termination::Stable;
  std::uint64_t search_nodes = 0;
  std::uint64_t search_cap_hits = 0;
};

struct RunMetrics {
  std::uint32_t instance_id = 0;
  GameKind game = GameKind::CLG;
  std::uint32_t flows_requested = 0;
  std::uint32_t flows_active = 0;
  std::optional<double> mean_links_per_active_flow;  // absent with no active flow
  double normalized_flow_steps = 0.0;
  bool converged = false;

  bool operator==(const RunMetrics&) const = default;
};

struct GameResult {
  std::vector<Strategy> final_profile;
  Trajectory trajectory;
  RunMetrics metrics;
};

/// Plays the repeated sequential game from the all-OFF profile under
/// round-robin scheduling until termination.
GameResult run_game(const RadioModel& model, const GameConfig& config);
GameResult run_game(const Scenario& scenario, const GameConfig& config);

RunMetrics compute_metrics(const NetworkState& state, const Trajectory& trajectory);

/// One JSON object per move record, newline separated.
std::string trajectory_to_jsonl(const Trajectory& trajectory);

}  // namespace crn
