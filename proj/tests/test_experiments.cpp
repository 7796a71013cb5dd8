#include <cmath>
#include <random>
#include <set>

#include "crn/experiments.hpp"
#include "doctest.h"

using namespace crn;

namespace {

BatchConfig small_batch() {
  BatchConfig cfg;
  cfg.flow_counts = {5, 10};
  cfg.n_instances = 3;
  cfg.master_seed = 11;
  cfg.jobs = 1;
  return cfg;
}

RunMetrics row(GameKind g, std::uint32_t flows, std::uint32_t active, std::optional<double> links, double steps,
               bool converged, std::uint32_t id = 0) {
  RunMetrics m;
  m.instance_id = id;
  m.game = g;
  m.flows_requested = flows;
  m.flows_active = active;
  m.mean_links_per_active_flow = links;
  m.normalized_flow_steps = steps;
  m.converged = converged;
  return m;
}

}  // namespace

TEST_CASE("derived seeds depend on every coordinate") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {1, 2})
    for (std::uint32_t flows : {10, 20, 30, 40})
      for (std::uint32_t i = 0; i < 50; ++i) seen.insert(derive_seed(master, flows, i));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(7, 10, 3) == derive_seed(7, 10, 3));
}

TEST_CASE("batch row count and order") {
  BatchConfig cfg = small_batch();
  cfg.flow_counts = {10, 20, 30, 40};
  cfg.n_instances = 1;
  cfg.games = {GameKind::PFG};
  const BatchResult r = run_batch(cfg);
  CHECK(r.failures.empty());
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.rows[i].flows_requested == cfg.flow_counts[i]);
    CHECK(r.rows[i].game == GameKind::PFG);
    CHECK(r.rows[i].instance_id == 0);
  }
}

TEST_CASE("paired design: each cell's games share one scenario") {
  const BatchConfig cfg = small_batch();
  const BatchResult r = run_batch(cfg);
  REQUIRE(r.rows.size() == 2 * 3 * 4);
  std::size_t k = 0;
  for (std::uint32_t flows : cfg.flow_counts)
    for (std::uint32_t i = 0; i < cfg.n_instances; ++i) {
      ScenarioParams p = cfg.base;
      p.n_flows = flows;
      p.seed = derive_seed(cfg.master_seed, flows, i);
      const Scenario sc = generate_scenario(p);
      for (GameKind g : cfg.games) {
        RunMetrics want = run_game(sc, {g, cfg.max_cycles, cfg.search_node_cap, p.seed}).metrics;
        want.instance_id = i;
        CHECK(r.rows[k++] == want);
      }
    }
}

TEST_CASE("batch output is reproducible and independent of threading") {
  BatchConfig cfg = small_batch();
  const std::string a = metrics_to_csv(run_batch(cfg).rows);
  const std::string b = metrics_to_csv(run_batch(cfg).rows);
  cfg.jobs = 4;
  const std::string c = metrics_to_csv(run_batch(cfg).rows);
  CHECK(a == b);
  CHECK(a == c);
  cfg.master_seed = 12;
  CHECK(metrics_to_csv(run_batch(cfg).rows) != a);
}

TEST_CASE("unroutable cells are reported, not fatal") {
  BatchConfig cfg;
  cfg.base.n_nodes = 2;
  cfg.flow_counts = {1};
  cfg.n_instances = 4;
  cfg.games = {GameKind::LLG};
  cfg.jobs = 1;
  const BatchResult r = run_batch(cfg);
  CHECK(r.rows.size() + r.failures.size() == 4);
  CHECK_FALSE(r.failures.empty());
  for (const auto& f : r.failures) CHECK(f.message.find("no routable pair") != std::string::npos);
}

TEST_CASE("results csv") {
  const std::vector<RunMetrics> rows{row(GameKind::CLG, 10, 3, 2.5, 35.0, true, 0),
                                     row(GameKind::LFG, 10, 0, std::nullopt, 12.0, false, 1),
                                     row(GameKind::PFG, 40, 11, 1.0 / 3.0, 80.0, true, 99)};
  const std::string text = metrics_to_csv(rows);
  CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
  CHECK(text.find("1,LFG,10,0,,12,false\n") != std::string::npos);
  CHECK(metrics_from_csv(text) == rows);

  std::mt19937_64 rng(5);
  std::vector<RunMetrics> random_rows;
  for (std::uint32_t i = 0; i < 200; ++i) {
    const auto active = static_cast<std::uint32_t>(rng() % 40);
    random_rows.push_back(row(kAllGames[rng() % 4], 40, active,
                              active ? std::optional<double>(std::ldexp(static_cast<double>(rng()), -60)) : std::nullopt,
                              std::ldexp(static_cast<double>(rng()), -50), rng() % 2, i));
  }
  CHECK(metrics_from_csv(metrics_to_csv(random_rows)) == random_rows);

  CHECK_THROWS_AS(metrics_from_csv("bad,header\n"), std::runtime_error);
  try {
    metrics_from_csv(std::string(kResultsHeader) + "\n0,CLG,10,3,2.5,35,true\n0,CLG,10,x,2.5,35,true\n");
    FAIL("accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("aggregate examples") {
  SUBCASE("two rows") {
    const auto agg = aggregate({row(GameKind::PFG, 10, 4, 2.0, 20.0, true), row(GameKind::PFG, 10, 6, 3.0, 20.0, false)});
    const auto& active = find_aggregate(agg, GameKind::PFG, 10, "flows_active");
    CHECK(active.mean == 5.0);
    CHECK(active.std == 1.0);
    CHECK(active.n == 2);
    CHECK(find_aggregate(agg, GameKind::PFG, 10, "converged").mean == 0.5);
    CHECK(find_aggregate(agg, GameKind::PFG, 10, "normalized_flow_steps").std == 0.0);
  }
  SUBCASE("single row has zero spread") {
    const auto agg = aggregate({row(GameKind::LLG, 20, 7, 1.5, 99.0, true)});
    CHECK(find_aggregate(agg, GameKind::LLG, 20, "flows_active").std == 0.0);
    CHECK(agg.size() == 4);
  }
  SUBCASE("undefined link means are left out") {
    const auto agg = aggregate({row(GameKind::LFG, 10, 0, std::nullopt, 5.0, true)});
    CHECK_THROWS_AS(find_aggregate(agg, GameKind::LFG, 10, "mean_links_per_active_flow"), std::out_of_range);
    CHECK(agg.size() == 3);
  }
  SUBCASE("groups are separated by game and flow count") {
    const auto agg = aggregate({row(GameKind::LFG, 10, 2, 1.0, 5.0, true), row(GameKind::LFG, 20, 8, 1.0, 5.0, true),
                                row(GameKind::CLG, 10, 4, 1.0, 5.0, true)});
    CHECK(find_aggregate(agg, GameKind::LFG, 10, "flows_active").mean == 2.0);
    CHECK(find_aggregate(agg, GameKind::LFG, 20, "flows_active").mean == 8.0);
    CHECK(find_aggregate(agg, GameKind::CLG, 10, "flows_active").mean == 4.0);
  }
}

TEST_CASE("aggregate matches an external recomputation") {
  std::vector<RunMetrics> rows;
  for (std::uint32_t i = 0; i < 20; ++i) {
    const std::uint32_t active = (i * 7) % 13;
    rows.push_back(row(GameKind::CLG, 30, active, active ? std::optional<double>(1 + (i % 5) * 0.5) : std::nullopt,
                       i * i * 0.25, i % 3 != 0, i));
  }
  const auto agg = aggregate(rows);
  // reference values from Python's statistics.fmean / pstdev
  struct Want {
    const char* metric;
    double mean, std;
    std::uint32_t n;
  };
  for (const Want& w : {Want{"flows_active", 5.4, 3.7067505985701277, 20},
                        Want{"mean_links_per_active_flow", 2.0277777777777777, 0.6966631224435806, 18},
                        Want{"normalized_flow_steps", 30.875, 28.373678383318577, 20},
                        Want{"converged", 0.65, 0.47696960070847283, 20}}) {
    CAPTURE(w.metric);
    const auto& a = find_aggregate(agg, GameKind::CLG, 30, w.metric);
    CHECK(a.mean == doctest::Approx(w.mean).epsilon(1e-12));
    CHECK(a.std == doctest::Approx(w.std).epsilon(1e-12));
    CHECK(a.n == w.n);
  }
  const std::string csv = aggregate_to_csv(agg);
  CHECK(csv.rfind(std::string(kAggregateHeader) + "\n", 0) == 0);
  CHECK(csv.find("CLG,30,converged,0.65,") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(35.0) == "35");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
