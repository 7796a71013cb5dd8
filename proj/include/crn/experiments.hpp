#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crn/games.hpp"
#include "crn/scenario.hpp"

namespace crn {

/// Monte-Carlo sweep: every (flow count, instance) gets its own scenario,
/// shared by all games so their results are paired.
struct BatchConfig {
  ScenarioParams base;  // n_flows and seed are overridden per cell
  std::vector<std::uint32_t> flow_counts{10, 20, 30, 40};
  std::uint32_t n_instances = 100;
  std::vector<GameKind> games{GameKind::LLG, GameKind::CLG, GameKind::LFG, GameKind::PFG};
  std::uint64_t master_seed = 1;
  std::uint32_t max_cycles = 50;
  std::uint64_t search_node_cap = 1'000'000;
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct BatchFailure {
  std::uint32_t flows_requested = 0;
  std::uint32_t instance_id = 0;
  std::string message;
};

struct BatchResult {
  std::vector<RunMetrics> rows;  // flow count, then instance, then game order
  std::vector<BatchFailure> failures;
};

/// splitmix64 over (master, flow count, instance): each cell's scenario seed
/// depends only on its own coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::uint32_t flow_count, std::uint32_t instance);

BatchResult run_batch(const BatchConfig& config);

inline constexpr const char* kResultsHeader =
    "instance_id,game,flows_requested,flows_active,mean_links_per_active_flow,normalized_flow_steps,converged";
inline constexpr const char* kAggregateHeader = "game,flows_requested,metric,mean,std,n";

std::string metrics_to_csv(const std::vector<RunMetrics>& rows);
/// Throws std::runtime_error with a line number on schema or value errors.
std::vector<RunMetrics> metrics_from_csv(const std::string& text);

struct AggregateRow {
  GameKind game = GameKind::CLG;
  std::uint32_t flows_requested = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // population
  std::uint32_t n = 0;

  bool operator==(const AggregateRow&) const = default;
};

inline constexpr const char* kMetricNames[] = {"flows_active", "mean_links_per_active_flow", "normalized_flow_steps",
                                               "converged"};

/// Mean and population standard deviation per (game, flow count, metric).
/// Rows where a metric is undefined are left out of that metric; groups with
/// no defined value produce no row. "converged" aggregates to the fraction.
std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows);
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

/// Looks up one aggregate entry; throws std::out_of_range if absent.
const AggregateRow& find_aggregate(const std::vector<AggregateRow>& rows, GameKind game, std::uint32_t flows,
                                   const std::string& metric);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace crn
