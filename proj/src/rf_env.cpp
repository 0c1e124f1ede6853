#include "imseek/rf_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace imseek
{

void PropagationConfig::validate() const
{
  if (!(path_loss_exponent > 0.0))
    throw std::invalid_argument("path_loss_exponent must be positive");
  if (!(ref_distance > 0.0))
    throw std::invalid_argument("ref_distance must be positive");
  if (!(shadowing_sigma_db >= 0.0))
    throw std::invalid_argument("shadowing_sigma_db must be non-negative");
  if (fading.enabled && !(fading.correlation_length > 0.0))
    throw std::invalid_argument("fading correlation_length must be positive");
  if (!(wall_attenuation_db >= 0.0))
    throw std::invalid_argument("wall_attenuation_db must be non-negative");
  for (const auto &b : bumps)
  {
    if (!(b.width > 0.0))
      throw std::invalid_argument("bump width must be positive");
  }
}

const TransmitterNode &RfEnvironment::node(int id) const
{
  for (const auto &n : nodes)
  {
    if (n.id == id)
      return n;
  }
  throw std::out_of_range("unknown transmitter id " + std::to_string(id));
}

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t bits)
{
  // (0, 1], never zero so the log below stays finite
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double lattice_gaussian(std::uint64_t seed, int node_id, std::int64_t i, std::int64_t j)
{
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(node_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  const double u1 = to_unit(h);
  const double u2 = to_unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace

double frozen_fading(const PropagationConfig &cfg, int node_id, Position p)
{
  if (!cfg.fading.enabled || cfg.fading.amplitude_db == 0.0)
    return 0.0;
  const double lx = p.x / cfg.fading.correlation_length;
  const double ly = p.y / cfg.fading.correlation_length;
  const double fx = std::floor(lx);
  const double fy = std::floor(ly);
  const auto i = static_cast<std::int64_t>(fx);
  const auto j = static_cast<std::int64_t>(fy);
  const double tx = lx - fx;
  const double ty = ly - fy;
  const double g00 = lattice_gaussian(cfg.seed, node_id, i, j);
  const double g10 = lattice_gaussian(cfg.seed, node_id, i + 1, j);
  const double g01 = lattice_gaussian(cfg.seed, node_id, i, j + 1);
  const double g11 = lattice_gaussian(cfg.seed, node_id, i + 1, j + 1);
  const double v = (1 - tx) * (1 - ty) * g00 + tx * (1 - ty) * g10 + (1 - tx) * ty * g01 + tx * ty * g11;
  return cfg.fading.amplitude_db * v;
}

int walls_crossed(const OccupancyGrid &grid, Position a, Position b)
{
  const double len = distance(a, b);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.25 * grid.resolution()))));
  std::set<int> hit;
  for (int k = 0; k <= steps; ++k)
  {
    const auto c = grid.cell_of(lerp(a, b, static_cast<double>(k) / steps));
    if (c && !grid.is_free(*c))
      hit.insert(grid.index(*c));
  }
  return static_cast<int>(hit.size());
}

double mean_rssi(const PropagationConfig &cfg, const TransmitterNode &node, Position p, const OccupancyGrid *walls)
{
  const double d = distance(p, node.position);
  double r = node.ref_power_dbm -
             10.0 * cfg.path_loss_exponent * std::log10(std::max(d, cfg.ref_distance) / cfg.ref_distance);
  r += frozen_fading(cfg, node.id, p);
  for (const auto &b : cfg.bumps)
  {
    const double q = distance(p, b.center) / b.width;
    r += b.amplitude_db * std::exp(-0.5 * q * q);
  }
  if (walls != nullptr && cfg.wall_attenuation_db > 0.0)
    r -= cfg.wall_attenuation_db * walls_crossed(*walls, node.position, p);
  return r;
}

double sample_rssi(const PropagationConfig &cfg, const TransmitterNode &node, Position p, Rng &rng,
                   const OccupancyGrid *walls)
{
  const double mean = mean_rssi(cfg, node, p, walls);
  if (cfg.shadowing_sigma_db == 0.0)
    return mean;
  std::normal_distribution<double> noise(0.0, cfg.shadowing_sigma_db);
  return mean + noise(rng);
}

std::vector<Sample> stream_over(const PropagationConfig &cfg, const std::vector<TransmitterNode> &nodes,
                                Position from, Position to, double duration, double t0, Rng &rng,
                                const OccupancyGrid *walls)
{
  std::vector<Sample> out;
  if (!(duration > 0.0))
    return out;
  for (const auto &node : nodes)
  {
    std::exponential_distribution<double> gap(node.packet_rate);
    for (double dt = gap(rng); dt < duration; dt += gap(rng))
    {
      const Position p = lerp(from, to, dt / duration);
      out.push_back(Sample{t0 + dt, p, node.id, sample_rssi(cfg, node, p, rng, walls)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Sample &a, const Sample &b) { return a.t < b.t; });
  return out;
}

std::vector<Sample> stream_along(const PropagationConfig &cfg, const std::vector<TransmitterNode> &nodes,
                                 Position from, Position to, double speed, double t0, Rng &rng,
                                 const OccupancyGrid *walls)
{
  if (!(speed > 0.0))
    throw std::invalid_argument("stream_along: speed must be positive");
  return stream_over(cfg, nodes, from, to, distance(from, to) / speed, t0, rng, walls);
}

} // namespace imseek
