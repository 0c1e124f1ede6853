#ifndef IMSEEK_RF_ENV_HPP_
#define IMSEEK_RF_ENV_HPP_

#include "imseek/geometry.hpp"
#include "imseek/world.hpp"

#include <cstdint>
#include <vector>

namespace imseek
{

struct TransmitterNode
{
  int id{1};
  Position position;
  double ref_power_dbm{-40.0}; // at ref_distance
  double packet_rate{200.0};   // packets per second
};

/// Gaussian lattice with spacing correlation_length, bilinearly
/// interpolated. Frozen in space for a fixed seed.
struct FadingConfig
{
  bool enabled{false};
  double amplitude_db{6.0};
  double correlation_length{0.125};
};

/// Persistent Gaussian-shaped gain added to the mean field, used to build
/// fields with a known local maximum.
struct FieldBump
{
  Position center;
  double amplitude_db{6.0};
  double width{1.0};
};

struct PropagationConfig
{
  double path_loss_exponent{2.5};
  double ref_distance{1.0};
  double shadowing_sigma_db{4.0};
  FadingConfig fading;
  double wall_attenuation_db{0.0}; // per occupied cell crossed by line of sight
  std::vector<FieldBump> bumps;
  std::uint64_t seed{0}; // fading field seed

  void validate() const;
};

/// One received packet.
struct Sample
{
  double t{0.0};
  Position position;
  int node_id{0};
  double rssi{0.0};
};

struct RfEnvironment
{
  PropagationConfig propagation;
  std::vector<TransmitterNode> nodes;

  const TransmitterNode &node(int id) const;
};

double frozen_fading(const PropagationConfig &cfg, int node_id, Position p);

/// Occupied cells crossed by the straight line a-b.
int walls_crossed(const OccupancyGrid &grid, Position a, Position b);

/// `walls` is only consulted when wall attenuation is enabled.
double mean_rssi(const PropagationConfig &cfg, const TransmitterNode &node, Position p,
                 const OccupancyGrid *walls = nullptr);

double sample_rssi(const PropagationConfig &cfg, const TransmitterNode &node, Position p, Rng &rng,
                   const OccupancyGrid *walls = nullptr);

/// Poisson packet arrivals from every node while moving linearly from
/// `from` to `to` over [t0, t0 + duration). Output is sorted by time.
std::vector<Sample> stream_over(const PropagationConfig &cfg, const std::vector<TransmitterNode> &nodes,
                                Position from, Position to, double duration, double t0, Rng &rng,
                                const OccupancyGrid *walls = nullptr);

std::vector<Sample> stream_along(const PropagationConfig &cfg, const std::vector<TransmitterNode> &nodes,
                                 Position from, Position to, double speed, double t0, Rng &rng,
                                 const OccupancyGrid *walls = nullptr);

} // namespace imseek

#endif // IMSEEK_RF_ENV_HPP_
