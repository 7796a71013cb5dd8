#include "crn/radio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crn {

namespace {

constexpr double kThresholdSlack = 1e-12;

}  // namespace

double path_gain(double distance, double exponent) {
  if (distance < 0.0) throw std::invalid_argument("path_gain: negative distance");
  if (distance == 0.0) return kInfiniteGain;
  return std::pow(distance, -exponent);
}

GainMatrix::GainMatrix(const Scenario& scenario) : size_(scenario.links.size()), gains_(size_ * size_) {
  const double gamma = scenario.params.path_loss_exp;
  for (std::size_t m = 0; m < size_; ++m) {
    const Position& tx = scenario.nodes[scenario.links[m].tx].position;
    for (std::size_t l = 0; l < size_; ++l) {
      gains_[m * size_ + l] =
          m == l ? scenario.links[l].direct_gain
                 : path_gain(distance(tx, scenario.nodes[scenario.links[l].rx].position), gamma);
    }
  }
}

RadioModel::RadioModel(const Scenario& scenario) : scenario_(&scenario), gains_(scenario) {
  const auto q = scenario.params.q_levels;
  powers_.resize(q);
  for (std::uint32_t level = 0; level < q; ++level)
    powers_[level] = static_cast<double>(level) * scenario.params.p_max / static_cast<double>(q - 1);
}

bool RadioModel::meets_threshold(double sinr) const noexcept {
  return sinr >= threshold() * (1.0 - kThresholdSlack);
}

void RadioModel::check_strategy(LinkId link, const Strategy& s) const {
  if (link >= n_links()) throw InvalidStrategyError("unknown link " + std::to_string(link));
  if (s.is_off()) {
    if (s.channel != kNoChannel) throw InvalidStrategyError("OFF strategy must not carry a channel");
    return;
  }
  if (s.power_level >= powers_.size())
    throw InvalidStrategyError("power level " + std::to_string(s.power_level) + " out of range");
  const auto& channels = scenario_->links[link].channels;
  if (!std::binary_search(channels.begin(), channels.end(), s.channel))
    throw InvalidStrategyError("channel " + std::to_string(s.channel) + " not admissible for link " +
                               std::to_string(link));
}

NetworkState::NetworkState(const RadioModel& model)
    : model_(&model),
      strategies_(model.n_links()),
      cache_(model.n_links() * static_cast<std::size_t>(model.n_channels())) {}

void NetworkState::contribute(LinkId from, const Strategy& s, int sign) {
  if (s.is_off()) return;
  const double p = model_->power(s.power_level);
  const GainMatrix& g = model_->gains();
  const std::size_t n = g.size();
  for (std::size_t l = 0; l < n; ++l) {
    if (l == from) continue;
    Accumulator& acc = cell(static_cast<LinkId>(l), s.channel);
    const double gain = g(from, static_cast<LinkId>(l));
    if (std::isinf(gain)) {
      sign > 0 ? ++acc.infinite : --acc.infinite;
      continue;
    }
    sign > 0 ? ++acc.finite : --acc.finite;
    if (acc.finite == 0) {
      acc.hi = acc.lo = 0.0;
      continue;
    }
    // TwoSum keeps the rounding error of every update in `lo`.
    const double x = sign * p * gain;
    const double sum = acc.hi + x;
    const double bp = sum - acc.hi;
    acc.lo += (acc.hi - (sum - bp)) + (x - bp);
    acc.hi = sum;
  }
}

void NetworkState::apply(LinkId link, const Strategy& s) {
  model_->check_strategy(link, s);
  Strategy& current = strategies_[link];
  if (current == s) return;
  contribute(link, current, -1);
  contribute(link, s, +1);
  current = s;
}

double NetworkState::interference(LinkId link, ChannelId channel) const {
  const Accumulator& acc = cell(link, channel);
  if (acc.infinite > 0) return kInfiniteGain;
  return acc.hi + acc.lo;
}

double NetworkState::sinr_with(LinkId link, const Strategy& s) const {
  if (s.is_off()) return 0.0;
  const double i = interference(link, s.channel);
  if (std::isinf(i)) return 0.0;
  return model_->power(s.power_level) * model_->gains()(link, link) / (model_->noise() + i);
}

bool NetworkState::is_active(LinkId link) const {
  const Strategy& s = strategies_.at(link);
  return !s.is_off() && model_->meets_threshold(sinr_with(link, s));
}

bool NetworkState::flow_active(FlowId flow) const {
  const auto& links = model_->scenario().flows.at(flow).links;
  return std::all_of(links.begin(), links.end(), [&](LinkId l) { return is_active(l); });
}

bool NetworkState::flow_off(FlowId flow) const {
  const auto& links = model_->scenario().flows.at(flow).links;
  return std::all_of(links.begin(), links.end(), [&](LinkId l) { return strategies_[l].is_off(); });
}

std::uint32_t NetworkState::active_flows() const {
  std::uint32_t n = 0;
  for (const Flow& f : model_->scenario().flows) n += flow_active(f.id) ? 1 : 0;
  return n;
}

FlowProfile NetworkState::flow_profile(FlowId flow) const {
  FlowProfile out;
  for (LinkId l : model_->scenario().flows.at(flow).links) out.push_back(strategies_[l]);
  return out;
}

void NetworkState::apply_flow(FlowId flow, const FlowProfile& profile) {
  const auto& links = model_->scenario().flows.at(flow).links;
  if (profile.size() != links.size()) throw InvalidStrategyError("flow profile size mismatch");
  for (std::size_t i = 0; i < links.size(); ++i) apply(links[i], profile[i]);
}

}  // namespace crn
