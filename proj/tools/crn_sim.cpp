// crn_sim: scenario generation, single game runs, Monte-Carlo sweeps and
// oracle checks for joint channel/power allocation games.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crn/experiments.hpp"
#include "crn/games.hpp"
#include "crn/oracle.hpp"
#include "crn/radio.hpp"
#include "crn/scenario.hpp"

namespace {

struct Options {
  std::uint32_t nodes = 200;
  double side = 1000.0;
  std::uint32_t channels = 10;
  double region = 100.0;
  std::uint32_t subset_min = 3;
  std::uint32_t subset_max = 8;
  double pmax_dbm = 20.0;
  std::uint32_t levels = 16;
  double gamma = 4.0;
  double alpha_db = 10.0;
  double noise_dbm = -70.0;
  std::uint32_t max_hops = 6;
  std::string flows;
  std::uint32_t instances = 100;
  std::uint32_t verify_instances = 10;
  std::string games = "llg,clg,lfg,pfg";
  std::uint64_t seed = 1;
  std::uint32_t max_cycles = 50;
  std::uint64_t search_cap = 1'000'000;
  std::string out;
  std::string aggregate_out;
  std::string scenario;
  std::string trajectory;
  unsigned jobs = 0;
};

void add_scenario_flags(CLI::App* app, Options& o) {
  app->add_option("--nodes", o.nodes, "Number of nodes")->capture_default_str();
  app->add_option("--side", o.side, "Side of the square area (m)")->capture_default_str();
  app->add_option("--channels", o.channels, "Number of channels")->capture_default_str();
  app->add_option("--region", o.region, "Side of a channel-availability region (m)")->capture_default_str();
  app->add_option("--subset-min", o.subset_min, "Minimum channels per region")->capture_default_str();
  app->add_option("--subset-max", o.subset_max, "Maximum channels per region")->capture_default_str();
  app->add_option("--pmax-dbm", o.pmax_dbm, "Maximum transmit power (dBm)")->capture_default_str();
  app->add_option("--levels", o.levels, "Power levels including zero")->capture_default_str();
  app->add_option("--gamma", o.gamma, "Path-loss exponent")->capture_default_str();
  app->add_option("--alpha-db", o.alpha_db, "SINR threshold (dB)")->capture_default_str();
  app->add_option("--noise-dbm", o.noise_dbm, "Noise power (dBm)")->capture_default_str();
  app->add_option("--max-hops", o.max_hops, "Maximum hops per flow")->capture_default_str();
  app->add_option("--seed", o.seed, "Seed (master seed for sweep/verify)")->capture_default_str();
}

void add_game_flags(CLI::App* app, Options& o) {
  app->add_option("--games", o.games, "Comma-separated games: llg,lfg,pfg,clg")->capture_default_str();
  app->add_option("--max-cycles", o.max_cycles, "Round-robin cycle limit")->capture_default_str();
  app->add_option("--search-cap", o.search_cap, "Search expansions per flow move")->capture_default_str();
}

crn::ScenarioParams params_from(const Options& o) {
  crn::ScenarioParams p;
  p.n_nodes = o.nodes;
  p.side_length = o.side;
  p.n_channels = o.channels;
  p.region_size = o.region;
  p.channel_subset_min = o.subset_min;
  p.channel_subset_max = o.subset_max;
  p.p_max = crn::dbm_to_watts(o.pmax_dbm);
  p.q_levels = o.levels;
  p.path_loss_exp = o.gamma;
  p.sinr_threshold = crn::db_to_linear(o.alpha_db);
  p.noise_power = crn::dbm_to_watts(o.noise_dbm);
  p.max_hops = o.max_hops;
  p.seed = o.seed;
  return p;
}

std::vector<std::uint32_t> parse_counts(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const unsigned long v = std::stoul(item, &used);
    if (used != item.size()) throw CLI::ValidationError("--flows", "not a number: " + item);
    out.push_back(static_cast<std::uint32_t>(v));
  }
  if (out.empty()) throw CLI::ValidationError("--flows", "empty list");
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

int cmd_gen(const Options& o) {
  crn::ScenarioParams p = params_from(o);
  p.n_flows = o.flows.empty() ? 10 : parse_counts(o.flows).at(0);
  const crn::Scenario s = crn::generate_scenario(p);
  write_output(o.out, crn::scenario_to_json(s));
  std::cerr << "generated " << s.nodes.size() << " nodes, " << s.flows.size() << " flows, " << s.links.size()
            << " links\n";
  return 0;
}

int cmd_run(const Options& o) {
  crn::Scenario s;
  if (!o.scenario.empty()) {
    s = crn::load_scenario(o.scenario);
  } else {
    crn::ScenarioParams p = params_from(o);
    p.n_flows = o.flows.empty() ? 10 : parse_counts(o.flows).at(0);
    s = crn::generate_scenario(p);
  }
  const crn::RadioModel model(s);
  std::vector<crn::RunMetrics> rows;
  std::string trajectories;
  for (crn::GameKind g : crn::parse_game_list(o.games)) {
    const auto r = crn::run_game(model, {g, o.max_cycles, o.search_cap, s.params.seed});
    rows.push_back(r.metrics);
    trajectories += crn::trajectory_to_jsonl(r.trajectory);
    std::cerr << crn::to_string(g) << ": " << r.trajectory.cycles << " cycles, " << r.trajectory.moves.size()
              << " moves, termination=" << crn::to_string(r.trajectory.termination)
              << ", search nodes=" << r.trajectory.search_nodes << ", cap hits=" << r.trajectory.search_cap_hits
              << "\n";
  }
  write_output(o.out, crn::metrics_to_csv(rows));
  if (!o.trajectory.empty()) write_output(o.trajectory, trajectories);
  return 0;
}

int cmd_sweep(const Options& o) {
  crn::BatchConfig cfg;
  cfg.base = params_from(o);
  cfg.flow_counts = parse_counts(o.flows.empty() ? "10,20,30,40" : o.flows);
  cfg.n_instances = o.instances;
  cfg.games = crn::parse_game_list(o.games);
  cfg.master_seed = o.seed;
  cfg.max_cycles = o.max_cycles;
  cfg.search_node_cap = o.search_cap;
  cfg.jobs = o.jobs;
  const crn::BatchResult result = crn::run_batch(cfg);
  for (const auto& f : result.failures)
    std::cerr << "instance " << f.instance_id << " (" << f.flows_requested << " flows) skipped: " << f.message << "\n";
  write_output(o.out, crn::metrics_to_csv(result.rows));
  if (!o.aggregate_out.empty())
    write_output(o.aggregate_out, crn::aggregate_to_csv(crn::aggregate(result.rows)));
  return 0;
}

int cmd_verify(const Options& o) {
  const auto report = crn::oracle::verify_tiny_instances(o.seed, o.verify_instances);
  std::cout << "instances=" << report.instances << " checks=" << report.checks
            << " failures=" << report.failures.size() << "\n";
  for (const auto& f : report.failures) std::cerr << "FAIL " << f << "\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint channel and power allocation games for multihop cognitive radio networks"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a scenario file");
  add_scenario_flags(gen, o);
  gen->add_option("--flows", o.flows, "Number of flows")->default_str("10");
  gen->add_option("--out", o.out, "Output scenario file (default stdout)");

  auto* run = app.add_subcommand("run", "Run games on one scenario");
  add_scenario_flags(run, o);
  add_game_flags(run, o);
  run->add_option("--flows", o.flows, "Number of flows when generating")->default_str("10");
  run->add_option("--scenario", o.scenario, "Scenario file (otherwise generated from flags)")
      ->check(CLI::ExistingFile);
  run->add_option("--out", o.out, "Metrics CSV (default stdout)");
  run->add_option("--trajectory", o.trajectory, "Write move records as JSON lines");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo batch over flow counts and instances");
  add_scenario_flags(sweep, o);
  add_game_flags(sweep, o);
  sweep->add_option("--flows", o.flows, "Comma-separated flow counts")->default_str("10,20,30,40");
  sweep->add_option("--instances", o.instances, "Instances per flow count")->capture_default_str();
  sweep->add_option("--out", o.out, "Results CSV (default stdout)");
  sweep->add_option("--aggregate", o.aggregate_out, "Aggregate CSV");
  sweep->add_option("--jobs", o.jobs, "Parallel cells (0: all cores)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Exhaustive oracle checks on tiny instances");
  verify->add_option("--seed", o.seed, "Seed")->capture_default_str();
  verify->add_option("--instances", o.verify_instances, "Tiny instances to check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
