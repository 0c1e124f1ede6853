#include "imseek/serialization.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace imseek
{

namespace
{

Json num(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

double num_or_nan(const Json &j, const char *key)
{
  const Json &v = j.at(key);
  return v.is_null() ? std::nan("") : v.get<double>();
}

Json sample_record(const TargetSample &s)
{
  Json j;
  j["type"] = "sample";
  j["t"] = s.t;
  j["x"] = s.position.x;
  j["y"] = s.position.y;
  j["value"] = s.value;
  return j;
}

} // namespace

void write_trajectory_log(std::ostream &out, const TrajectoryLog &log)
{
  {
    Json h;
    h["type"] = "episode";
    h["seed"] = log.seed;
    h["strategy"] = to_string(log.strategy);
    h["start"] = to_json(log.start);
    h["seeker"] = to_json(log.config);
    h["model"] = to_json(log.model);
    h["target"] = to_json(log.target);
    out << h.dump() << '\n';
  }

  std::map<int, const RefitEvent *> refit_by_n;
  for (const auto &r : log.refits)
    refit_by_n[r.n] = &r;

  std::size_t next_sample = 0;
  auto flush_samples = [&](double until) {
    while (next_sample < log.samples.size() && log.samples[next_sample].t <= until)
      out << sample_record(log.samples[next_sample++]).dump() << '\n';
  };

  for (const auto &rec : log.iterations)
  {
    flush_samples(rec.t);
    if (rec.action != ActionKind::Initial)
    {
      if (auto it = refit_by_n.find(rec.n); rec.refit && it != refit_by_n.end())
      {
        const RefitEvent &r = *it->second;
        Json j;
        j["type"] = "refit";
        j["n"] = r.n;
        j["t"] = r.t;
        j["x"] = r.position.x;
        j["y"] = r.position.y;
        j["window_mean"] = num(r.window_mean);
        j["prediction"] = num(r.prediction);
        out << j.dump() << '\n';
      }
      if (!std::isnan(rec.epsilon))
      {
        Json j;
        j["type"] = "epsilon_draw";
        j["n"] = rec.n;
        j["t"] = rec.t;
        j["epsilon"] = rec.epsilon;
        j["draw"] = rec.draw;
        j["greedy"] = rec.action == ActionKind::Greedy;
        out << j.dump() << '\n';
      }
    }
    Json w;
    w["type"] = "waypoint";
    w["n"] = rec.n;
    w["t"] = rec.t;
    w["action"] = to_string(rec.action);
    w["x"] = rec.waypoint.x;
    w["y"] = rec.waypoint.y;
    w["refit"] = rec.refit;
    w["fit_failed"] = rec.fit_failed;
    w["fallback"] = rec.fallback;
    w["window_mean"] = num(rec.window_mean);
    w["prediction"] = num(rec.prediction);
    Json path = Json::array();
    for (const auto &p : rec.path)
      path.push_back(to_json(p));
    w["path"] = path;
    out << w.dump() << '\n';
  }
  flush_samples(std::numeric_limits<double>::infinity());

  Json e;
  e["type"] = "end";
  e["t"] = log.end_time;
  e["x"] = log.final_position.x;
  e["y"] = log.final_position.y;
  e["path_length"] = log.path_length;
  e["iterations"] = log.loop_iterations();
  e["aborted"] = log.aborted;
  e["reason"] = log.abort_reason;
  out << e.dump() << '\n';
}

std::string trajectory_log_to_string(const TrajectoryLog &log)
{
  std::ostringstream os;
  write_trajectory_log(os, log);
  return os.str();
}

TrajectoryLog read_trajectory_log(std::istream &in)
{
  TrajectoryLog log;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  bool have_end = false;
  double pending_eps = std::nan("");
  double pending_draw = std::nan("");
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    const std::string where = "log line " + std::to_string(lineno);
    try
    {
      const Json j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "episode")
      {
        log.seed = j.at("seed").get<std::uint64_t>();
        log.strategy = strategy_from_string(j.at("strategy").get<std::string>());
        log.start = {j.at("start")[0].get<double>(), j.at("start")[1].get<double>()};
        log.config = seeker_config_from_json(j.at("seeker"), where + ".seeker");
        log.model = model_params_from_json(j.at("model"), where + ".model");
        log.target = target_from_json(j.at("target"), where + ".target");
        have_header = true;
      }
      else if (type == "sample")
      {
        log.samples.push_back(TargetSample{j.at("t").get<double>(),
                                           {j.at("x").get<double>(), j.at("y").get<double>()},
                                           j.at("value").get<double>()});
      }
      else if (type == "refit")
      {
        log.refits.push_back(RefitEvent{j.at("n").get<int>(), j.at("t").get<double>(),
                                        {j.at("x").get<double>(), j.at("y").get<double>()},
                                        num_or_nan(j, "window_mean"), num_or_nan(j, "prediction")});
      }
      else if (type == "epsilon_draw")
      {
        pending_eps = j.at("epsilon").get<double>();
        pending_draw = j.at("draw").get<double>();
      }
      else if (type == "waypoint")
      {
        IterationRecord r;
        r.n = j.at("n").get<int>();
        r.t = j.at("t").get<double>();
        r.action = action_from_string(j.at("action").get<std::string>());
        r.waypoint = {j.at("x").get<double>(), j.at("y").get<double>()};
        r.refit = j.at("refit").get<bool>();
        r.fit_failed = j.at("fit_failed").get<bool>();
        r.fallback = j.at("fallback").get<bool>();
        r.window_mean = num_or_nan(j, "window_mean");
        r.prediction = num_or_nan(j, "prediction");
        for (const auto &p : j.at("path"))
          r.path.push_back({p[0].get<double>(), p[1].get<double>()});
        r.epsilon = pending_eps;
        r.draw = pending_draw;
        pending_eps = pending_draw = std::nan("");
        log.iterations.push_back(std::move(r));
      }
      else if (type == "end")
      {
        log.end_time = j.at("t").get<double>();
        log.final_position = {j.at("x").get<double>(), j.at("y").get<double>()};
        log.path_length = j.at("path_length").get<double>();
        log.aborted = j.at("aborted").get<bool>();
        log.abort_reason = j.at("reason").get<std::string>();
        have_end = true;
      }
      else
      {
        throw ConfigError(where + ": unknown record type '" + type + "'");
      }
    }
    catch (const Json::exception &e)
    {
      throw ConfigError(where + ": " + e.what());
    }
    catch (const std::invalid_argument &e)
    {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (!have_header || !have_end)
    throw ConfigError("trajectory log: missing episode header or end record");
  return log;
}

} // namespace imseek
