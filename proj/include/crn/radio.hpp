#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crn/scenario.hpp"

namespace crn {

inline constexpr double kInfiniteGain = std::numeric_limits<double>::infinity();
inline constexpr ChannelId kNoChannel = std::numeric_limits<ChannelId>::max();

/// d^-gamma; a zero distance yields kInfiniteGain.
double path_gain(double distance, double exponent);

/// Per-link action: quantised power level plus channel. Level 0 is OFF and
/// carries no channel.
struct Strategy {
  std::uint32_t power_level = 0;
  ChannelId channel = kNoChannel;

  static constexpr Strategy off() { return {}; }
  [[nodiscard]] constexpr bool is_off() const { return power_level == 0; }

  bool operator==(const Strategy&) const = default;
};

using FlowProfile = std::vector<Strategy>;  // one entry per link of a flow, route order

class InvalidStrategyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cross gains between every transmitter and every receiver. Entry (m, l) is
/// the gain from the transmitter of link m to the receiver of link l.
class GainMatrix {
 public:
  GainMatrix() = default;
  explicit GainMatrix(const Scenario& scenario);

  [[nodiscard]] double operator()(LinkId from, LinkId to) const { return gains_[from * size_ + to]; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

 private:
  std::size_t size_ = 0;
  std::vector<double> gains_;
};

/// Immutable physical layer for one scenario. Shared read-only between
/// concurrent game runs; the scenario must outlive it.
class RadioModel {
 public:
  explicit RadioModel(const Scenario& scenario);

  [[nodiscard]] const Scenario& scenario() const noexcept { return *scenario_; }
  [[nodiscard]] const GainMatrix& gains() const noexcept { return gains_; }
  [[nodiscard]] std::size_t n_links() const noexcept { return gains_.size(); }
  [[nodiscard]] std::uint32_t n_channels() const noexcept { return scenario_->params.n_channels; }
  [[nodiscard]] double noise() const noexcept { return scenario_->params.noise_power; }
  [[nodiscard]] double threshold() const noexcept { return scenario_->params.sinr_threshold; }

  /// p(q) = q * p_max / (Q - 1).
  [[nodiscard]] double power(std::uint32_t level) const { return powers_.at(level); }

  /// SINR >= alpha, with a 1e-12 relative allowance for rounding so that
  /// analytically exact boundary cases count as established.
  [[nodiscard]] bool meets_threshold(double sinr) const noexcept;

  /// Throws InvalidStrategyError unless `s` is OFF or uses an admissible
  /// channel of `link` with a level in [1, Q-1].
  void check_strategy(LinkId link, const Strategy& s) const;

 private:
  const Scenario* scenario_;
  GainMatrix gains_;
  std::vector<double> powers_;
};

/// Current strategy of every link plus cached co-channel interference at
/// every receiver on every channel. Single-owner, mutable.
///
/// The cache holds, for each (receiver link l, channel c), the sum of
/// p_m * g(m, l) over transmitting links m != l on c. Sums are kept in
/// double-double form and reset exactly when their last contributor leaves,
/// so removing a strong interferer does not leave cancellation residue.
/// Contributions through an infinite gain are counted separately.
class NetworkState {
 public:
  explicit NetworkState(const RadioModel& model);

  [[nodiscard]] const RadioModel& model() const noexcept { return *model_; }
  [[nodiscard]] const Strategy& strategy(LinkId link) const { return strategies_.at(link); }
  [[nodiscard]] const std::vector<Strategy>& strategies() const noexcept { return strategies_; }

  void apply(LinkId link, const Strategy& s);

  /// Total interference at link's receiver on `channel`; kInfiniteGain when
  /// a co-located transmitter uses it.
  [[nodiscard]] double interference(LinkId link, ChannelId channel) const;

  /// SINR of `link` under its current strategy; 0 when OFF.
  [[nodiscard]] double sinr(LinkId link) const { return sinr_with(link, strategies_[link]); }
  /// SINR `link` would see if it alone switched to `s`.
  [[nodiscard]] double sinr_with(LinkId link, const Strategy& s) const;

  [[nodiscard]] bool is_active(LinkId link) const;
  [[nodiscard]] bool flow_active(FlowId flow) const;
  [[nodiscard]] bool flow_off(FlowId flow) const;
  [[nodiscard]] std::uint32_t active_flows() const;

  [[nodiscard]] FlowProfile flow_profile(FlowId flow) const;
  void apply_flow(FlowId flow, const FlowProfile& profile);

 private:
  struct Accumulator {
    double hi = 0.0;
    double lo = 0.0;
    std::uint32_t finite = 0;
    std::uint32_t infinite = 0;
  };

  void contribute(LinkId from, const Strategy& s, int sign);
  Accumulator& cell(LinkId l, ChannelId c) { return cache_[static_cast<std::size_t>(l) * model_->n_channels() + c]; }
  const Accumulator& cell(LinkId l, ChannelId c) const {
    return cache_[static_cast<std::size_t>(l) * model_->n_channels() + c];
  }

  const RadioModel* model_;
  std::vector<Strategy> strategies_;
  std::vector<Accumulator> cache_;
};

}  // namespace crn
