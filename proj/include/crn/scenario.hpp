#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace crn {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using FlowId = std::uint32_t;
using ChannelId = std::uint32_t;

/// Physical and topological configuration of one network instance.
/// Powers are linear watts and the SINR threshold is a linear ratio; the
/// dB-domain helpers below exist for configuration boundaries only.
struct ScenarioParams {
  std::uint32_t n_nodes = 200;
  double side_length = 1000.0;  // m
  std::uint32_t n_channels = 10;
  double region_size = 100.0;  // m
  std::uint32_t channel_subset_min = 3;
  std::uint32_t channel_subset_max = 8;
  double p_max = 0.1;  // W (20 dBm)
  std::uint32_t q_levels = 16;
  double path_loss_exp = 4.0;
  double sinr_threshold = 10.0;  // linear (10 dB)
  double noise_power = 1e-10;    // W (-70 dBm)
  std::uint32_t max_hops = 6;
  std::uint32_t n_flows = 0;
  std::uint64_t seed = 0;

  /// Distance at which a lone transmitter at p_max reaches the threshold.
  [[nodiscard]] double max_range() const;
  [[nodiscard]] std::uint32_t regions_per_side() const;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  bool operator==(const ScenarioParams&) const = default;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double ratio);

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

struct Node {
  NodeId id = 0;
  Position position;
  std::vector<ChannelId> channels;  // sorted, unique
  bool operator==(const Node&) const = default;
};

struct DirectedLink {
  LinkId id = 0;
  NodeId tx = 0;
  NodeId rx = 0;
  double direct_gain = 0.0;
  std::vector<ChannelId> channels;  // tx ∩ rx, sorted
  FlowId flow = 0;
  std::uint32_t index_in_flow = 0;
  bool operator==(const DirectedLink&) const = default;
};

struct Flow {
  FlowId id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  std::vector<LinkId> links;  // source to destination
  bool operator==(const Flow&) const = default;
};

/// Immutable network instance: nodes, routed flows and their links.
struct Scenario {
  ScenarioParams params;
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  std::vector<DirectedLink> links;

  [[nodiscard]] std::vector<NodeId> route_of(FlowId flow) const;
  [[nodiscard]] double mean_links_per_flow() const;

  bool operator==(const Scenario&) const = default;
};

/// Raised when generation cannot satisfy the requested flows.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating scenario file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string field, std::size_t line = 0);

  [[nodiscard]] const std::string& field() const noexcept { return field_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// Undirected connectivity graph: nodes within max range sharing a channel.
class ConnectivityGraph {
 public:
  ConnectivityGraph(const std::vector<Node>& nodes, const ScenarioParams& params);

  [[nodiscard]] const std::vector<NodeId>& neighbours(NodeId n) const { return adjacency_.at(n); }
  [[nodiscard]] std::size_t size() const noexcept { return adjacency_.size(); }
  [[nodiscard]] bool connected(NodeId a, NodeId b) const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;  // ascending ids
};

bool within_range(const Node& a, const Node& b, const ScenarioParams& params);
std::vector<ChannelId> common_channels(const Node& a, const Node& b);

/// Minimum-hop route, ties broken by lexicographically smallest node-id sequence.
std::optional<std::vector<NodeId>> shortest_route(const ConnectivityGraph& graph, NodeId source,
                                                  NodeId destination);
std::optional<std::vector<NodeId>> shortest_route(const Scenario& scenario, NodeId source,
                                                  NodeId destination);

/// Builds a link with its direct gain and admissible channels.
DirectedLink make_link(const std::vector<Node>& nodes, NodeId tx, NodeId rx, const ScenarioParams& params);

/// Appends a flow along `route`, materialising its links.
void append_flow(Scenario& scenario, const std::vector<NodeId>& route);

inline constexpr std::uint32_t kRouteAttemptsPerFlow = 1000;

Scenario generate_scenario(const ScenarioParams& params);

/// Samples `n_flows` routable source/destination pairs and appends them to
/// `scenario`. Pairs that are unreachable or exceed max_hops are resampled,
/// up to kRouteAttemptsPerFlow draws per flow.
void generate_flows(Scenario& scenario, const ConnectivityGraph& graph, std::uint32_t n_flows,
                    std::mt19937_64& rng);

/// Checks every structural invariant; throws ParseError on violation.
void validate_scenario(const Scenario& scenario);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace crn
