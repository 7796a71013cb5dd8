#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crn/games.hpp"
#include "crn/radio.hpp"
#include "crn/scenario.hpp"

// Brute-force ground truth for tiny instances. Everything here recomputes
// SINR from node geometry on every call and enumerates strategy spaces in
// full; it shares no code path with the cached engine or the pruned search.
namespace crn::oracle {

inline constexpr std::uint64_t kMaxJointProfiles = 10'000'000;

class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Profile = std::vector<Strategy>;  // one entry per link of the scenario

/// Every strategy of a link, OFF included.
std::vector<Strategy> link_strategies(const Scenario& scenario, LinkId link);

double sinr(const Scenario& scenario, const Profile& profile, LinkId link);
bool link_active(const Scenario& scenario, const Profile& profile, LinkId link);
bool flow_active(const Scenario& scenario, const Profile& profile, FlowId flow);
std::uint32_t active_flows(const Scenario& scenario, const Profile& profile);

/// Utility of `player` (flow id for flow games, link id for LLG).
int utility(const Scenario& scenario, const Profile& profile, GameKind game, std::uint32_t player);

struct Optimum {
  std::uint32_t max_active = 0;
  Profile witness;
};

/// Exact maximum number of simultaneously active flows.
Optimum global_optimum(const Scenario& scenario);

/// True iff no player has a strictly improving unilateral deviation over its
/// full strategy space. Supports LLG, LFG and PFG.
bool is_pure_nash(const Profile& profile, GameKind game, const Scenario& scenario);

/// Small-instance parameters: a 200 m square with four regions, two channels,
/// two power levels, at most two hops and `n_flows` flows.
ScenarioParams tiny_params(std::uint64_t seed, std::uint32_t n_flows = 3);

/// Number of joint profiles of the scenario (saturating).
std::uint64_t joint_space_size(const Scenario& scenario);

struct VerifyReport {
  std::uint32_t instances = 0;
  std::uint32_t checks = 0;
  std::vector<std::string> failures;

  [[nodiscard]] bool ok() const noexcept { return failures.empty() && instances > 0; }
};

/// Generates `n_instances` tiny scenarios (joint space <= 10^6) and checks,
/// against exhaustive enumeration: converged LLG/LFG/PFG terminal profiles
/// are pure NE; PFG moves strictly raise the potential; the global-optimum
/// witness is a PFG NE; CLG terminal flows are fully on or fully off.
VerifyReport verify_tiny_instances(std::uint64_t seed, std::uint32_t n_instances = 10);

}  // namespace crn::oracle
