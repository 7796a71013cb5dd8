#include "crn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crn/radio.hpp"

namespace crn {

namespace {

// Relative slack on the range test so the noise-limited boundary (exactly
// 100 m for the default parameters) counts as in range despite rounding.
constexpr double kRangeSlack = 1e-12;

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double ScenarioParams::max_range() const {
  return std::pow(p_max / (sinr_threshold * noise_power), 1.0 / path_loss_exp);
}

std::uint32_t ScenarioParams::regions_per_side() const {
  return static_cast<std::uint32_t>(std::llround(side_length / region_size));
}

void ScenarioParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid scenario params: " + msg); };
  if (n_nodes == 0) fail("n_nodes must be > 0");
  if (!(side_length > 0.0)) fail("side_length must be > 0");
  if (n_channels == 0) fail("n_channels must be > 0");
  if (!(region_size > 0.0)) fail("region_size must be > 0");
  const double regions = side_length / region_size;
  if (std::abs(regions - std::round(regions)) > 1e-9 * std::max(1.0, regions) || std::round(regions) < 1.0)
    fail("side_length must be a whole multiple of region_size");
  if (channel_subset_min < 1 || channel_subset_min > channel_subset_max || channel_subset_max > n_channels)
    fail("need 1 <= channel_subset_min <= channel_subset_max <= n_channels");
  if (!(p_max > 0.0)) fail("p_max must be > 0");
  if (q_levels < 2) fail("q_levels must be >= 2");
  if (!(path_loss_exp > 0.0)) fail("path_loss_exp must be > 0");
  if (!(sinr_threshold > 1.0)) fail("sinr_threshold must be > 1 (linear)");
  if (!(noise_power > 0.0)) fail("noise_power must be > 0");
  if (max_hops < 1) fail("max_hops must be >= 1");
  if (n_flows > 0 && n_nodes < 2) fail("flows need at least two nodes");
}

ParseError::ParseError(const std::string& what, std::string field, std::size_t line)
    : std::runtime_error(what), field_(std::move(field)), line_(line) {}

std::vector<NodeId> Scenario::route_of(FlowId flow) const {
  const Flow& f = flows.at(flow);
  std::vector<NodeId> route;
  route.reserve(f.links.size() + 1);
  route.push_back(f.source);
  for (LinkId l : f.links) route.push_back(links[l].rx);
  return route;
}

double Scenario::mean_links_per_flow() const {
  if (flows.empty()) return 0.0;
  return static_cast<double>(links.size()) / static_cast<double>(flows.size());
}

bool within_range(const Node& a, const Node& b, const ScenarioParams& params) {
  return distance(a.position, b.position) <= params.max_range() * (1.0 + kRangeSlack);
}

std::vector<ChannelId> common_channels(const Node& a, const Node& b) {
  std::vector<ChannelId> out;
  std::set_intersection(a.channels.begin(), a.channels.end(), b.channels.begin(), b.channels.end(),
                        std::back_inserter(out));
  return out;
}

ConnectivityGraph::ConnectivityGraph(const std::vector<Node>& nodes, const ScenarioParams& params)
    : adjacency_(nodes.size()) {
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (within_range(nodes[a], nodes[b], params) && !common_channels(nodes[a], nodes[b]).empty()) {
        adjacency_[a].push_back(static_cast<NodeId>(b));
        adjacency_[b].push_back(static_cast<NodeId>(a));
      }
    }
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool ConnectivityGraph::connected(NodeId a, NodeId b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::optional<std::vector<NodeId>> shortest_route(const ConnectivityGraph& graph, NodeId source,
                                                  NodeId destination) {
  if (source == destination) throw std::invalid_argument("shortest_route: source == destination");
  if (source >= graph.size() || destination >= graph.size())
    throw std::out_of_range("shortest_route: node id out of range");

  // Unit-weight Dijkstra reduces to BFS. Distances are taken from the
  // destination so the forward walk can pick the smallest-id successor that
  // stays on a shortest path, which yields the lexicographically least route.
  constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> hops(graph.size(), kUnreached);
  std::deque<NodeId> frontier{destination};
  hops[destination] = 0;
  while (!frontier.empty() && hops[source] == kUnreached) {
    const NodeId n = frontier.front();
    frontier.pop_front();
    for (NodeId m : graph.neighbours(n)) {
      if (hops[m] == kUnreached) {
        hops[m] = hops[n] + 1;
        frontier.push_back(m);
      }
    }
  }
  if (hops[source] == kUnreached) return std::nullopt;

  std::vector<NodeId> route{source};
  NodeId at = source;
  while (at != destination) {
    for (NodeId m : graph.neighbours(at)) {
      if (hops[m] != kUnreached && hops[m] + 1 == hops[at]) {
        at = m;
        break;
      }
    }
    route.push_back(at);
  }
  return route;
}

std::optional<std::vector<NodeId>> shortest_route(const Scenario& scenario, NodeId source,
                                                  NodeId destination) {
  return shortest_route(ConnectivityGraph(scenario.nodes, scenario.params), source, destination);
}

DirectedLink make_link(const std::vector<Node>& nodes, NodeId tx, NodeId rx, const ScenarioParams& params) {
  DirectedLink link;
  link.tx = tx;
  link.rx = rx;
  link.direct_gain = path_gain(distance(nodes.at(tx).position, nodes.at(rx).position), params.path_loss_exp);
  link.channels = common_channels(nodes[tx], nodes[rx]);
  return link;
}

void append_flow(Scenario& scenario, const std::vector<NodeId>& route) {
  if (route.size() < 2) throw std::invalid_argument("append_flow: route needs at least two nodes");
  Flow flow;
  flow.id = static_cast<FlowId>(scenario.flows.size());
  flow.source = route.front();
  flow.destination = route.back();
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    DirectedLink link = make_link(scenario.nodes, route[i], route[i + 1], scenario.params);
    link.id = static_cast<LinkId>(scenario.links.size());
    link.flow = flow.id;
    link.index_in_flow = static_cast<std::uint32_t>(i);
    flow.links.push_back(link.id);
    scenario.links.push_back(std::move(link));
  }
  scenario.flows.push_back(std::move(flow));
}

void generate_flows(Scenario& scenario, const ConnectivityGraph& graph, std::uint32_t n_flows,
                    std::mt19937_64& rng) {
  if (n_flows == 0) return;
  const auto n = static_cast<NodeId>(scenario.nodes.size());
  if (n < 2) throw ScenarioError("generate_flows: need at least two nodes");
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  std::uniform_int_distribution<NodeId> pick_other(0, n - 2);
  for (std::uint32_t f = 0; f < n_flows; ++f) {
    bool placed = false;
    for (std::uint32_t attempt = 0; attempt < kRouteAttemptsPerFlow && !placed; ++attempt) {
      const NodeId src = pick(rng);
      NodeId dst = pick_other(rng);
      if (dst >= src) ++dst;
      const auto route = shortest_route(graph, src, dst);
      if (!route || route->size() - 1 > scenario.params.max_hops) continue;
      append_flow(scenario, *route);
      placed = true;
    }
    if (!placed) {
      throw ScenarioError("generate_flows: no routable pair within " + std::to_string(scenario.params.max_hops) +
                          " hops after " + std::to_string(kRouteAttemptsPerFlow) + " attempts (flow " +
                          std::to_string(f) + ")");
    }
  }
}

Scenario generate_scenario(const ScenarioParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);

  const std::uint32_t per_side = params.regions_per_side();
  std::vector<std::vector<ChannelId>> region_channels(static_cast<std::size_t>(per_side) * per_side);
  std::uniform_int_distribution<std::uint32_t> subset_size(params.channel_subset_min, params.channel_subset_max);
  std::vector<ChannelId> all(params.n_channels);
  for (auto& subset : region_channels) {
    std::iota(all.begin(), all.end(), ChannelId{0});
    std::shuffle(all.begin(), all.end(), rng);
    subset.assign(all.begin(), all.begin() + subset_size(rng));
    std::sort(subset.begin(), subset.end());
  }

  Scenario scenario;
  scenario.params = params;
  scenario.nodes.resize(params.n_nodes);
  std::uniform_real_distribution<double> coord(0.0, params.side_length);
  auto region_index = [&](double v) {
    const auto i = static_cast<std::int64_t>(std::floor(v / params.region_size));
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(i, 0, per_side - 1));
  };
  for (NodeId id = 0; id < params.n_nodes; ++id) {
    Node& node = scenario.nodes[id];
    node.id = id;
    node.position.x = coord(rng);
    node.position.y = coord(rng);
    node.channels = region_channels[region_index(node.position.y) * per_side + region_index(node.position.x)];
  }

  const ConnectivityGraph graph(scenario.nodes, params);
  generate_flows(scenario, graph, params.n_flows, rng);
  return scenario;
}

// ---------------------------------------------------------------------------
// Validation and JSON I/O

void validate_scenario(const Scenario& s) {
  const ScenarioParams& p = s.params;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), "params");
  }
  if (s.nodes.size() != p.n_nodes)
    throw ParseError("node count does not match params.n_nodes", "nodes");
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const Node& n = s.nodes[i];
    const std::string field = "nodes[" + std::to_string(i) + "]";
    if (n.id != i) throw ParseError("node ids must be 0..n-1 in order", field + ".id");
    if (!(n.position.x >= 0.0 && n.position.x <= p.side_length && n.position.y >= 0.0 &&
          n.position.y <= p.side_length))
      throw ParseError("node position outside the deployment area", field + ".x/y");
    if (n.channels.size() < p.channel_subset_min || n.channels.size() > p.channel_subset_max)
      throw ParseError("channel subset size outside [min, max]", field + ".channels");
    for (std::size_t c = 0; c < n.channels.size(); ++c) {
      if (n.channels[c] >= p.n_channels || (c > 0 && n.channels[c] <= n.channels[c - 1]))
        throw ParseError("channels must be sorted, unique and < n_channels", field + ".channels");
    }
  }
  if (s.flows.size() != p.n_flows) throw ParseError("flow count does not match params.n_flows", "flows");
  std::size_t next_link = 0;
  for (std::size_t f = 0; f < s.flows.size(); ++f) {
    const Flow& flow = s.flows[f];
    const std::string field = "flows[" + std::to_string(f) + "]";
    if (flow.id != f) throw ParseError("flow ids must be 0..F-1 in order", field + ".id");
    if (flow.source == flow.destination) throw ParseError("source equals destination", field);
    if (flow.links.empty() || flow.links.size() > p.max_hops)
      throw ParseError("route hop count outside [1, max_hops]", field + ".route");
    NodeId at = flow.source;
    for (std::size_t k = 0; k < flow.links.size(); ++k) {
      const LinkId lid = flow.links[k];
      if (lid != next_link++ || lid >= s.links.size()) throw ParseError("link ids out of order", field + ".route");
      const DirectedLink& l = s.links[lid];
      if (l.tx != at || l.tx >= s.nodes.size() || l.rx >= s.nodes.size())
        throw ParseError("route does not chain", field + ".route");
      if (l.flow != flow.id || l.index_in_flow != k) throw ParseError("link flow membership mismatch", field);
      if (!within_range(s.nodes[l.tx], s.nodes[l.rx], p))
        throw ParseError("hop " + std::to_string(k) + " exceeds the maximum transmission range", field + ".route");
      if (l.channels.empty() || l.channels != common_channels(s.nodes[l.tx], s.nodes[l.rx]))
        throw ParseError("hop " + std::to_string(k) + " endpoints share no channel", field + ".route");
      at = l.rx;
    }
    if (at != flow.destination) throw ParseError("route does not end at destination", field + ".route");
  }
  if (next_link != s.links.size()) throw ParseError("links not owned by any flow", "flows");
}

namespace {

using Json = nlohmann::ordered_json;

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

const Json& member(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", path);
  return *it;
}

template <typename T>
T field_as(const Json& obj, const char* key, const std::string& path) {
  const Json& v = member(obj, key, path);
  const std::string where = path.empty() ? std::string(key) : path + "." + key;
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ParseError("expected a number", where);
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ParseError("expected a non-negative integer", where);
  }
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), where);
  }
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  const ScenarioParams& p = s.params;
  Json params = {
      {"n_nodes", p.n_nodes},
      {"side_length", p.side_length},
      {"n_channels", p.n_channels},
      {"region_size", p.region_size},
      {"channel_subset_min", p.channel_subset_min},
      {"channel_subset_max", p.channel_subset_max},
      {"p_max_dbm", watts_to_dbm(p.p_max)},
      {"q_levels", p.q_levels},
      {"path_loss_exp", p.path_loss_exp},
      {"sinr_threshold_db", linear_to_db(p.sinr_threshold)},
      {"noise_dbm", watts_to_dbm(p.noise_power)},
      {"max_hops", p.max_hops},
      {"n_flows", p.n_flows},
      {"seed", p.seed},
  };
  Json nodes = Json::array();
  for (const Node& n : s.nodes)
    nodes.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}, {"channels", n.channels}});
  Json flows = Json::array();
  for (const Flow& f : s.flows)
    flows.push_back({{"id", f.id}, {"src", f.source}, {"dst", f.destination}, {"route", s.route_of(f.id)}});
  Json doc = {{"params", params}, {"nodes", nodes}, {"flows", flows}};
  return doc.dump(1) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON at line ") + std::to_string(line_of(text, e.byte)) + ": " + e.what(),
                     "", line_of(text, e.byte));
  }

  Scenario s;
  const Json& jp = member(doc, "params", "");
  ScenarioParams& p = s.params;
  p.n_nodes = field_as<std::uint32_t>(jp, "n_nodes", "params");
  p.side_length = field_as<double>(jp, "side_length", "params");
  p.n_channels = field_as<std::uint32_t>(jp, "n_channels", "params");
  p.region_size = field_as<double>(jp, "region_size", "params");
  p.channel_subset_min = field_as<std::uint32_t>(jp, "channel_subset_min", "params");
  p.channel_subset_max = field_as<std::uint32_t>(jp, "channel_subset_max", "params");
  p.p_max = dbm_to_watts(field_as<double>(jp, "p_max_dbm", "params"));
  p.q_levels = field_as<std::uint32_t>(jp, "q_levels", "params");
  p.path_loss_exp = field_as<double>(jp, "path_loss_exp", "params");
  p.sinr_threshold = db_to_linear(field_as<double>(jp, "sinr_threshold_db", "params"));
  p.noise_power = dbm_to_watts(field_as<double>(jp, "noise_dbm", "params"));
  p.max_hops = field_as<std::uint32_t>(jp, "max_hops", "params");
  p.n_flows = field_as<std::uint32_t>(jp, "n_flows", "params");
  p.seed = field_as<std::uint64_t>(jp, "seed", "params");

  const Json& jn = member(doc, "nodes", "");
  if (!jn.is_array()) throw ParseError("expected an array", "nodes");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = field_as<NodeId>(jn[i], "id", path);
    n.position.x = field_as<double>(jn[i], "x", path);
    n.position.y = field_as<double>(jn[i], "y", path);
    n.channels = field_as<std::vector<ChannelId>>(jn[i], "channels", path);
    s.nodes.push_back(std::move(n));
  }

  const Json& jf = member(doc, "flows", "");
  if (!jf.is_array()) throw ParseError("expected an array", "flows");
  for (std::size_t i = 0; i < jf.size(); ++i) {
    const std::string path = "flows[" + std::to_string(i) + "]";
    const auto id = field_as<FlowId>(jf[i], "id", path);
    const auto src = field_as<NodeId>(jf[i], "src", path);
    const auto dst = field_as<NodeId>(jf[i], "dst", path);
    const auto route = field_as<std::vector<NodeId>>(jf[i], "route", path);
    if (id != i) throw ParseError("flow ids must be 0..F-1 in order", path + ".id");
    if (route.size() < 2 || route.front() != src || route.back() != dst)
      throw ParseError("route must run from src to dst", path + ".route");
    for (NodeId n : route)
      if (n >= s.nodes.size()) throw ParseError("route references unknown node", path + ".route");
    append_flow(s, route);
  }

  validate_scenario(s);
  return s;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << scenario_to_json(scenario);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace crn
