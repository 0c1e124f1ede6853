#ifndef IMSEEK_SERIALIZATION_HPP_
#define IMSEEK_SERIALIZATION_HPP_

#include "imseek/models.hpp"
#include "imseek/rf_env.hpp"
#include "imseek/seeker.hpp"
#include "imseek/targets.hpp"

#include <json.hpp>

#include <initializer_list>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace imseek
{

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Typed, path-aware access to one JSON object. Missing keys fall back to
/// the supplied default; wrong types raise ConfigError.
class FieldReader
{
public:
  FieldReader(const Json &j, std::string path);

  bool has(const char *key) const;
  const Json &at(const char *key) const;
  std::string path_of(const char *key) const;

  double number(const char *key, double def) const;
  double number(const char *key) const;
  int integer(const char *key, int def) const;
  int integer(const char *key) const;
  std::uint64_t uint64(const char *key, std::uint64_t def) const;
  std::uint64_t uint64(const char *key) const;
  bool boolean(const char *key, bool def) const;
  std::string string(const char *key, const std::string &def) const;
  std::string string(const char *key) const;
  Position position(const char *key) const;
  Position position(const char *key, Position def) const;

  /// ConfigError on keys outside `known`.
  void only(std::initializer_list<const char *> known) const;

private:
  const Json &j_;
  std::string path_;
};

Json to_json(Position p);
Json to_json(const SeekerConfig &cfg);
Json to_json(const ModelParams &params);
Json to_json(const TargetSpec &spec);
Json to_json(const PropagationConfig &cfg);
Json to_json(const TransmitterNode &node);

SeekerConfig seeker_config_from_json(const Json &j, const std::string &path = "seeker");
ModelParams model_params_from_json(const Json &j, const std::string &path = "model");
TargetSpec target_from_json(const Json &j, const std::string &path = "target");
PropagationConfig propagation_from_json(const Json &j, const std::string &path = "propagation");
TransmitterNode transmitter_from_json(const Json &j, const std::string &path);

/// Newline-delimited JSON, one record per line: an `episode` header, then
/// `sample`, `refit`, `epsilon_draw` and `waypoint` records in time order,
/// closed by an `end` record. Field order is fixed.
void write_trajectory_log(std::ostream &out, const TrajectoryLog &log);
std::string trajectory_log_to_string(const TrajectoryLog &log);
TrajectoryLog read_trajectory_log(std::istream &in);

} // namespace imseek

#endif // IMSEEK_SERIALIZATION_HPP_
