#include "imseek/targets.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace imseek
{

std::vector<int> TargetSpec::node_ids() const
{
  if (const auto *b = std::get_if<Bridge>(&kind))
    return {b->first, b->second};
  return {std::get<SingleSource>(kind).node_id};
}

void TargetSpec::validate(const std::vector<TransmitterNode> &nodes) const
{
  for (int id : node_ids())
  {
    if (std::none_of(nodes.begin(), nodes.end(), [id](const TransmitterNode &n) { return n.id == id; }))
      throw std::invalid_argument("target references unknown transmitter id " + std::to_string(id));
  }
  if (const auto *b = std::get_if<Bridge>(&kind))
  {
    if (b->first == b->second)
      throw std::invalid_argument("bridge target needs two distinct transmitters");
    if (!(pair_window > 0.0))
      throw std::invalid_argument("pair_window must be positive");
  }
}

std::vector<TargetSample> pair_samples(std::span<const Sample> first, std::span<const Sample> second,
                                       double window)
{
  std::vector<TargetSample> out;
  if (second.empty())
    return out;
  out.reserve(first.size());
  for (const Sample &s : first)
  {
    // first element with t >= s.t; the nearest is it or its predecessor
    auto it = std::lower_bound(second.begin(), second.end(), s.t,
                               [](const Sample &a, double t) { return a.t < t; });
    const Sample *best = nullptr;
    if (it != second.begin())
      best = &*std::prev(it);
    if (it != second.end() && (best == nullptr || it->t - s.t < s.t - best->t))
      best = &*it;
    if (best == nullptr || std::abs(best->t - s.t) > window)
      continue;
    out.push_back(TargetSample{s.t, s.position, eval_bridge(s.rssi, best->rssi)});
  }
  return out;
}

std::vector<TargetSample> to_target_samples(const TargetSpec &spec, std::span<const Sample> merged)
{
  if (const auto *b = std::get_if<Bridge>(&spec.kind))
  {
    std::vector<Sample> a, c;
    for (const Sample &s : merged)
    {
      if (s.node_id == b->first)
        a.push_back(s);
      else if (s.node_id == b->second)
        c.push_back(s);
    }
    return pair_samples(a, c, spec.pair_window);
  }
  const int id = std::get<SingleSource>(spec.kind).node_id;
  std::vector<TargetSample> out;
  for (const Sample &s : merged)
  {
    if (s.node_id == id)
      out.push_back(TargetSample{s.t, s.position, eval_single(s.rssi)});
  }
  return out;
}

double mean_target(const TargetSpec &spec, const RfEnvironment &env, Position p, const OccupancyGrid *walls)
{
  if (const auto *b = std::get_if<Bridge>(&spec.kind))
    return eval_bridge(mean_rssi(env.propagation, env.node(b->first), p, walls),
                       mean_rssi(env.propagation, env.node(b->second), p, walls));
  return eval_single(mean_rssi(env.propagation, env.node(std::get<SingleSource>(spec.kind).node_id), p, walls));
}

double sample_target(const TargetSpec &spec, const RfEnvironment &env, Position p, Rng &rng,
                     const OccupancyGrid *walls)
{
  if (const auto *b = std::get_if<Bridge>(&spec.kind))
  {
    const double r1 = sample_rssi(env.propagation, env.node(b->first), p, rng, walls);
    const double r2 = sample_rssi(env.propagation, env.node(b->second), p, rng, walls);
    return eval_bridge(r1, r2);
  }
  return eval_single(
      sample_rssi(env.propagation, env.node(std::get<SingleSource>(spec.kind).node_id), p, rng, walls));
}

} // namespace imseek
