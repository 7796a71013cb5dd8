#include "crn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "crn/radio.hpp"

namespace crn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line, const char* column) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty())
    throw std::runtime_error("results CSV line " + std::to_string(line) + ": bad value '" + field + "' in column " +
                             column);
  return value;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint32_t flow_count, std::uint32_t instance) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ flow_count);
  return splitmix64(s ^ (static_cast<std::uint64_t>(instance) << 32 | 0x5eedULL));
}

BatchResult run_batch(const BatchConfig& config) {
  config.base.validate();
  if (config.games.empty()) throw std::invalid_argument("run_batch: no games requested");
  if (config.max_cycles < 1 || config.search_node_cap < 1)
    throw std::invalid_argument("run_batch: max_cycles and search_node_cap must be >= 1");

  struct Cell {
    std::uint32_t flows;
    std::uint32_t instance;
    std::vector<RunMetrics> rows;
    std::optional<std::string> failure;
  };
  std::vector<Cell> cells;
  for (std::uint32_t flows : config.flow_counts)
    for (std::uint32_t i = 0; i < config.n_instances; ++i) cells.push_back({flows, i, {}, std::nullopt});

  auto work = [&](Cell& cell) {
    ScenarioParams params = config.base;
    params.n_flows = cell.flows;
    params.seed = derive_seed(config.master_seed, cell.flows, cell.instance);
    try {
      const Scenario scenario = generate_scenario(params);
      const RadioModel model(scenario);
      for (GameKind game : config.games) {
        GameConfig gc{game, config.max_cycles, config.search_node_cap, params.seed};
        RunMetrics m = run_game(model, gc).metrics;
        m.instance_id = cell.instance;
        cell.rows.push_back(m);
      }
    } catch (const ScenarioError& e) {
      cell.failure = e.what();
    }
  };

  unsigned jobs = config.jobs != 0 ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        work(cells[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  BatchResult result;
  for (Cell& cell : cells) {
    if (cell.failure) {
      result.failures.push_back({cell.flows, cell.instance, *cell.failure});
      continue;
    }
    for (RunMetrics& m : cell.rows) result.rows.push_back(m);
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string metrics_to_csv(const std::vector<RunMetrics>& rows) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const RunMetrics& m : rows) {
    out += std::to_string(m.instance_id);
    out += ',';
    out += to_string(m.game);
    out += ',';
    out += std::to_string(m.flows_requested);
    out += ',';
    out += std::to_string(m.flows_active);
    out += ',';
    if (m.mean_links_per_active_flow) out += format_double(*m.mean_links_per_active_flow);
    out += ',';
    out += format_double(m.normalized_flow_steps);
    out += ',';
    out += m.converged ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::vector<RunMetrics> metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw std::runtime_error("results CSV line 1: header must be '" + std::string(kResultsHeader) + "'");
  std::vector<RunMetrics> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7)
      throw std::runtime_error("results CSV line " + std::to_string(lineno) + ": expected 7 fields, got " +
                               std::to_string(f.size()));
    RunMetrics m;
    m.instance_id = parse_number<std::uint32_t>(f[0], lineno, "instance_id");
    try {
      m.game = parse_game_kind(f[1]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("results CSV line " + std::to_string(lineno) + ": " + e.what());
    }
    m.flows_requested = parse_number<std::uint32_t>(f[2], lineno, "flows_requested");
    m.flows_active = parse_number<std::uint32_t>(f[3], lineno, "flows_active");
    if (!f[4].empty()) m.mean_links_per_active_flow = parse_number<double>(f[4], lineno, "mean_links_per_active_flow");
    m.normalized_flow_steps = parse_number<double>(f[5], lineno, "normalized_flow_steps");
    if (f[6] != "true" && f[6] != "false")
      throw std::runtime_error("results CSV line " + std::to_string(lineno) + ": converged must be true/false");
    m.converged = f[6] == "true";
    rows.push_back(m);
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows) {
  using Key = std::tuple<int, std::uint32_t>;
  std::map<Key, std::vector<const RunMetrics*>> groups;
  for (const RunMetrics& m : rows) groups[{static_cast<int>(m.game), m.flows_requested}].push_back(&m);

  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    for (const char* metric : kMetricNames) {
      std::vector<double> values;
      for (const RunMetrics* m : members) {
        const std::string_view name = metric;
        if (name == "flows_active") values.push_back(m->flows_active);
        else if (name == "mean_links_per_active_flow") {
          if (m->mean_links_per_active_flow) values.push_back(*m->mean_links_per_active_flow);
        } else if (name == "normalized_flow_steps") values.push_back(m->normalized_flow_steps);
        else values.push_back(m->converged ? 1.0 : 0.0);
      }
      if (values.empty()) continue;
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / static_cast<double>(values.size());
      double sq = 0.0;
      for (double v : values) sq += (v - mean) * (v - mean);
      AggregateRow row;
      row.game = static_cast<GameKind>(std::get<0>(key));
      row.flows_requested = std::get<1>(key);
      row.metric = metric;
      row.mean = mean;
      row.std = std::sqrt(sq / static_cast<double>(values.size()));
      row.n = static_cast<std::uint32_t>(values.size());
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out = kAggregateHeader;
  out += '\n';
  for (const AggregateRow& r : rows) {
    out += std::string(to_string(r.game)) + ',' + std::to_string(r.flows_requested) + ',' + r.metric + ',' +
           format_double(r.mean) + ',' + format_double(r.std) + ',' + std::to_string(r.n) + '\n';
  }
  return out;
}

const AggregateRow& find_aggregate(const std::vector<AggregateRow>& rows, GameKind game, std::uint32_t flows,
                                   const std::string& metric) {
  for (const AggregateRow& r : rows)
    if (r.game == game && r.flows_requested == flows && r.metric == metric) return r;
  throw std::out_of_range("no aggregate for " + std::string(to_string(game)) + "/" + std::to_string(flows) + "/" +
                          metric);
}

}  // namespace crn
