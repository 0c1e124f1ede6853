#include "imseek/serialization.hpp"

#include <algorithm>
#include <cstring>

namespace imseek
{

FieldReader::FieldReader(const Json &j, std::string path) : j_(j), path_(std::move(path))
{
  if (!j_.is_object())
    throw ConfigError(path_ + ": expected an object");
}

bool FieldReader::has(const char *key) const { return j_.contains(key); }

std::string FieldReader::path_of(const char *key) const
{
  return path_.empty() ? std::string(key) : path_ + "." + key;
}

const Json &FieldReader::at(const char *key) const
{
  if (!j_.contains(key))
    throw ConfigError(path_of(key) + ": required field missing");
  return j_.at(key);
}

double FieldReader::number(const char *key) const
{
  const Json &v = at(key);
  if (!v.is_number())
    throw ConfigError(path_of(key) + ": expected a number");
  return v.get<double>();
}

double FieldReader::number(const char *key, double def) const { return has(key) ? number(key) : def; }

int FieldReader::integer(const char *key) const
{
  const Json &v = at(key);
  if (!v.is_number_integer())
    throw ConfigError(path_of(key) + ": expected an integer");
  return v.get<int>();
}

int FieldReader::integer(const char *key, int def) const { return has(key) ? integer(key) : def; }

std::uint64_t FieldReader::uint64(const char *key) const
{
  const Json &v = at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(path_of(key) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint64_t FieldReader::uint64(const char *key, std::uint64_t def) const
{
  return has(key) ? uint64(key) : def;
}

bool FieldReader::boolean(const char *key, bool def) const
{
  if (!has(key))
    return def;
  const Json &v = at(key);
  if (!v.is_boolean())
    throw ConfigError(path_of(key) + ": expected true or false");
  return v.get<bool>();
}

std::string FieldReader::string(const char *key) const
{
  const Json &v = at(key);
  if (!v.is_string())
    throw ConfigError(path_of(key) + ": expected a string");
  return v.get<std::string>();
}

std::string FieldReader::string(const char *key, const std::string &def) const
{
  return has(key) ? string(key) : def;
}

Position FieldReader::position(const char *key) const
{
  const Json &v = at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(path_of(key) + ": expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Position FieldReader::position(const char *key, Position def) const { return has(key) ? position(key) : def; }

void FieldReader::only(std::initializer_list<const char *> known) const
{
  for (const auto &item : j_.items())
  {
    const bool ok =
        std::any_of(known.begin(), known.end(), [&](const char *k) { return item.key() == k; });
    if (!ok)
      throw ConfigError(path_of(item.key().c_str()) + ": unknown field");
  }
}

// ------------------------------------------------------------------ writers

Json to_json(Position p) { return Json::array({p.x, p.y}); }

Json to_json(const SeekerConfig &c)
{
  Json j;
  j["step_width"] = c.step_width;
  j["epsilon_floor"] = c.epsilon_floor;
  j["epsilon_span"] = c.epsilon_span;
  j["anneal_alpha"] = c.anneal_alpha;
  j["error_threshold"] = c.error_threshold;
  j["validation_window"] = c.validation_window;
  j["novelty_min_dist"] = c.novelty_min_dist;
  j["greedy_grid_resolution"] = c.greedy_grid_resolution;
  j["initial_step_factor"] = c.initial_step_factor;
  j["max_iterations"] = c.max_iterations;
  j["stop_radius"] = c.stop_radius ? Json(*c.stop_radius) : Json(nullptr);
  j["speed"] = c.speed;
  j["dwell_time"] = c.dwell_time;
  j["line_search_increment"] = c.line_search_increment;
  j["novelty_cutoff_factor"] = c.novelty_cutoff_factor;
  j["training_cap"] = c.training_cap;
  j["gradient_radius"] = c.gradient_radius;
  j["max_replans"] = c.max_replans;
  return j;
}

Json to_json(const ModelParams &params)
{
  Json j;
  if (const auto *r = std::get_if<RidgeParams>(&params))
  {
    j["kind"] = "ridge";
    j["local_radius"] = r->local_radius;
    j["regularization"] = r->regularization;
  }
  else
  {
    const auto &m = std::get<MlpParams>(params);
    j["kind"] = "mlp";
    j["hidden"] = m.hidden;
    j["learning_rate"] = m.learning_rate;
    j["momentum"] = m.momentum;
    j["epochs"] = m.epochs;
    j["init_range"] = m.init_range;
  }
  return j;
}

Json to_json(const TargetSpec &spec)
{
  Json j;
  if (const auto *b = std::get_if<Bridge>(&spec.kind))
  {
    j["kind"] = "bridge";
    j["nodes"] = Json::array({b->first, b->second});
    j["pair_window"] = spec.pair_window;
  }
  else
  {
    j["kind"] = "single";
    j["node"] = std::get<SingleSource>(spec.kind).node_id;
  }
  return j;
}

Json to_json(const PropagationConfig &c)
{
  Json j;
  j["path_loss_exponent"] = c.path_loss_exponent;
  j["ref_distance"] = c.ref_distance;
  j["shadowing_sigma_db"] = c.shadowing_sigma_db;
  j["fading"] = {{"enabled", c.fading.enabled},
                 {"amplitude_db", c.fading.amplitude_db},
                 {"correlation_length", c.fading.correlation_length}};
  j["wall_attenuation_db"] = c.wall_attenuation_db;
  Json bumps = Json::array();
  for (const auto &b : c.bumps)
    bumps.push_back({{"center", to_json(b.center)}, {"amplitude_db", b.amplitude_db}, {"width", b.width}});
  j["bumps"] = bumps;
  j["seed"] = c.seed;
  return j;
}

Json to_json(const TransmitterNode &n)
{
  Json j;
  j["id"] = n.id;
  j["position"] = to_json(n.position);
  j["ref_power_dbm"] = n.ref_power_dbm;
  j["packet_rate"] = n.packet_rate;
  return j;
}

// ------------------------------------------------------------------ readers

SeekerConfig seeker_config_from_json(const Json &j, const std::string &path)
{
  const FieldReader f(j, path);
  f.only({"step_width", "epsilon_floor", "epsilon_span", "anneal_alpha", "error_threshold", "validation_window",
          "novelty_min_dist", "greedy_grid_resolution", "initial_step_factor", "max_iterations", "stop_radius",
          "speed", "dwell_time", "line_search_increment", "novelty_cutoff_factor", "training_cap",
          "gradient_radius", "max_replans"});
  SeekerConfig c;
  c.step_width = f.number("step_width", c.step_width);
  c.epsilon_floor = f.number("epsilon_floor", c.epsilon_floor);
  c.epsilon_span = f.number("epsilon_span", c.epsilon_span);
  c.anneal_alpha = f.number("anneal_alpha", c.anneal_alpha);
  c.error_threshold = f.number("error_threshold", c.error_threshold);
  c.validation_window = f.number("validation_window", c.validation_window);
  c.novelty_min_dist = f.number("novelty_min_dist", c.novelty_min_dist);
  c.greedy_grid_resolution = f.number("greedy_grid_resolution", c.greedy_grid_resolution);
  c.initial_step_factor = f.number("initial_step_factor", c.initial_step_factor);
  c.max_iterations = f.integer("max_iterations", c.max_iterations);
  if (f.has("stop_radius") && !f.at("stop_radius").is_null())
    c.stop_radius = f.number("stop_radius");
  c.speed = f.number("speed", c.speed);
  c.dwell_time = f.number("dwell_time", c.dwell_time);
  c.line_search_increment = f.number("line_search_increment", c.line_search_increment);
  c.novelty_cutoff_factor = f.number("novelty_cutoff_factor", c.novelty_cutoff_factor);
  c.training_cap = f.uint64("training_cap", c.training_cap);
  c.gradient_radius = f.number("gradient_radius", c.gradient_radius);
  c.max_replans = f.integer("max_replans", c.max_replans);
  try
  {
    c.validate();
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

ModelParams model_params_from_json(const Json &j, const std::string &path)
{
  const FieldReader f(j, path);
  const std::string kind = f.string("kind", "ridge");
  if (kind == "ridge")
  {
    f.only({"kind", "local_radius", "regularization"});
    RidgeParams r;
    r.local_radius = f.number("local_radius", r.local_radius);
    r.regularization = f.number("regularization", r.regularization);
    if (!(r.local_radius > 0.0) || !(r.regularization >= 0.0))
      throw ConfigError(path + ": local_radius must be positive and regularization non-negative");
    return r;
  }
  if (kind == "mlp")
  {
    f.only({"kind", "hidden", "learning_rate", "momentum", "epochs", "init_range"});
    MlpParams m;
    m.hidden = f.integer("hidden", m.hidden);
    m.learning_rate = f.number("learning_rate", m.learning_rate);
    m.momentum = f.number("momentum", m.momentum);
    m.epochs = f.integer("epochs", m.epochs);
    m.init_range = f.number("init_range", m.init_range);
    if (m.hidden < 1 || m.epochs < 0 || !(m.learning_rate > 0.0) || m.momentum < 0.0 || !(m.init_range >= 0.0))
      throw ConfigError(path + ": invalid MLP parameters");
    return m;
  }
  throw ConfigError(f.path_of("kind") + ": expected \"ridge\" or \"mlp\", got \"" + kind + "\"");
}

TargetSpec target_from_json(const Json &j, const std::string &path)
{
  const FieldReader f(j, path);
  const std::string kind = f.string("kind", "single");
  TargetSpec spec;
  if (kind == "single")
  {
    f.only({"kind", "node"});
    spec.kind = SingleSource{f.integer("node", 1)};
    return spec;
  }
  if (kind == "bridge")
  {
    f.only({"kind", "nodes", "pair_window"});
    const Json &ids = f.at("nodes");
    if (!ids.is_array() || ids.size() != 2 || !ids[0].is_number_integer() || !ids[1].is_number_integer())
      throw ConfigError(f.path_of("nodes") + ": expected [id1, id2]");
    spec.kind = Bridge{ids[0].get<int>(), ids[1].get<int>()};
    spec.pair_window = f.number("pair_window", spec.pair_window);
    if (!(spec.pair_window > 0.0))
      throw ConfigError(f.path_of("pair_window") + ": must be positive");
    return spec;
  }
  throw ConfigError(f.path_of("kind") + ": expected \"single\" or \"bridge\", got \"" + kind + "\"");
}

PropagationConfig propagation_from_json(const Json &j, const std::string &path)
{
  const FieldReader f(j, path);
  f.only({"path_loss_exponent", "ref_distance", "shadowing_sigma_db", "fading", "wall_attenuation_db", "bumps",
          "seed"});
  PropagationConfig c;
  c.path_loss_exponent = f.number("path_loss_exponent", c.path_loss_exponent);
  c.ref_distance = f.number("ref_distance", c.ref_distance);
  c.shadowing_sigma_db = f.number("shadowing_sigma_db", c.shadowing_sigma_db);
  if (f.has("fading"))
  {
    const FieldReader ff(f.at("fading"), f.path_of("fading"));
    ff.only({"enabled", "amplitude_db", "correlation_length"});
    c.fading.enabled = ff.boolean("enabled", c.fading.enabled);
    c.fading.amplitude_db = ff.number("amplitude_db", c.fading.amplitude_db);
    c.fading.correlation_length = ff.number("correlation_length", c.fading.correlation_length);
  }
  c.wall_attenuation_db = f.number("wall_attenuation_db", c.wall_attenuation_db);
  if (f.has("bumps"))
  {
    const Json &arr = f.at("bumps");
    if (!arr.is_array())
      throw ConfigError(f.path_of("bumps") + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
    {
      const FieldReader bf(arr[i], f.path_of("bumps") + "[" + std::to_string(i) + "]");
      bf.only({"center", "amplitude_db", "width"});
      FieldBump b;
      b.center = bf.position("center");
      b.amplitude_db = bf.number("amplitude_db", b.amplitude_db);
      b.width = bf.number("width", b.width);
      c.bumps.push_back(b);
    }
  }
  c.seed = f.uint64("seed", c.seed);
  try
  {
    c.validate();
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

TransmitterNode transmitter_from_json(const Json &j, const std::string &path)
{
  const FieldReader f(j, path);
  f.only({"id", "position", "ref_power_dbm", "packet_rate"});
  TransmitterNode n;
  n.id = f.integer("id");
  n.position = f.position("position");
  n.ref_power_dbm = f.number("ref_power_dbm", n.ref_power_dbm);
  n.packet_rate = f.number("packet_rate", n.packet_rate);
  if (!(n.packet_rate > 0.0))
    throw ConfigError(f.path_of("packet_rate") + ": must be positive");
  return n;
}

} // namespace imseek
