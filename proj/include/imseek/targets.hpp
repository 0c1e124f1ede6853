#ifndef IMSEEK_TARGETS_HPP_
#define IMSEEK_TARGETS_HPP_

#include "imseek/geometry.hpp"
#include "imseek/rf_env.hpp"

#include <cmath>
#include <span>
#include <variant>
#include <vector>

namespace imseek
{

struct SingleSource
{
  int node_id{1};
};

/// Maximal and equal signal strength to two nodes.
struct Bridge
{
  int first{1};
  int second{2};
};

struct TargetSpec
{
  std::variant<SingleSource, Bridge> kind{SingleSource{}};
  double pair_window{0.25}; // seconds, bridge pairing only

  bool is_bridge() const { return std::holds_alternative<Bridge>(kind); }
  std::vector<int> node_ids() const;
  /// Throws std::invalid_argument if a referenced node is missing or the
  /// bridge ids coincide.
  void validate(const std::vector<TransmitterNode> &nodes) const;
};

/// A target value located in space and time (the learner's training data).
struct TargetSample
{
  double t{0.0};
  Position position;
  double value{0.0};
};

inline double eval_single(double rssi) { return rssi; }

inline double eval_bridge(double r1, double r2)
{
  return -std::abs(r1 - r2) - std::abs(r1 + r2);
}

/// Pairs each `first` sample with the time-nearest `second` sample within
/// +-window (earlier one on ties). Unpaired samples are dropped. Both inputs
/// must be time-sorted.
std::vector<TargetSample> pair_samples(std::span<const Sample> first, std::span<const Sample> second,
                                       double window);

/// Turns a merged, time-sorted packet stream into target samples.
std::vector<TargetSample> to_target_samples(const TargetSpec &spec, std::span<const Sample> merged);

/// Target value of the noise-free field (evaluation and plotting only).
double mean_target(const TargetSpec &spec, const RfEnvironment &env, Position p,
                   const OccupancyGrid *walls = nullptr);

/// One noisy target evaluation at p.
double sample_target(const TargetSpec &spec, const RfEnvironment &env, Position p, Rng &rng,
                     const OccupancyGrid *walls = nullptr);

} // namespace imseek

#endif // IMSEEK_TARGETS_HPP_
