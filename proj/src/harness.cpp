#include "imseek/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace imseek
{

// ------------------------------------------------------------------ config

ExperimentConfig parse_config(const Json &doc, const std::filesystem::path &base_dir)
{
  const FieldReader f(doc, "");
  f.only({"map", "start", "footprint_radius", "transmitters", "propagation", "target", "model", "seeker",
          "strategy", "runs", "base_seed", "output_dir"});

  ExperimentConfig c;
  c.map_path = base_dir / f.string("map");
  c.start = f.position("start");
  c.footprint.radius = f.number("footprint_radius", c.footprint.radius);
  if (!(c.footprint.radius > 0.0))
    throw ConfigError("footprint_radius: must be positive");

  const Json &tx = f.at("transmitters");
  if (!tx.is_array() || tx.empty())
    throw ConfigError("transmitters: expected a non-empty array");
  std::set<int> ids;
  for (std::size_t i = 0; i < tx.size(); ++i)
  {
    c.env.nodes.push_back(transmitter_from_json(tx[i], "transmitters[" + std::to_string(i) + "]"));
    if (!ids.insert(c.env.nodes.back().id).second)
      throw ConfigError("transmitters[" + std::to_string(i) + "].id: duplicate id " +
                        std::to_string(c.env.nodes.back().id));
  }

  if (f.has("propagation"))
    c.env.propagation = propagation_from_json(f.at("propagation"), "propagation");

  c.target.kind = SingleSource{c.env.nodes.front().id};
  if (f.has("target"))
    c.target = target_from_json(f.at("target"), "target");
  try
  {
    c.target.validate(c.env.nodes);
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(std::string("target: ") + e.what());
  }

  if (f.has("model"))
  {
    const Json &m = f.at("model");
    c.models.clear();
    if (m.is_array())
    {
      if (m.empty())
        throw ConfigError("model: expected at least one model");
      for (std::size_t i = 0; i < m.size(); ++i)
        c.models.push_back(model_params_from_json(m[i], "model[" + std::to_string(i) + "]"));
    }
    else
    {
      c.models.push_back(model_params_from_json(m, "model"));
    }
  }

  Json seeker = f.has("seeker") ? f.at("seeker") : Json::object();
  if (!seeker.is_object())
    throw ConfigError("seeker: expected an object");
  if (c.target.is_bridge() && !seeker.contains("error_threshold"))
    seeker["error_threshold"] = 7.0;
  c.seeker = seeker_config_from_json(seeker, "seeker");

  try
  {
    c.strategy = strategy_from_string(f.string("strategy", "internal_model"));
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(std::string("strategy: ") + e.what());
  }
  c.runs = f.integer("runs", c.runs);
  if (c.runs < 1)
    throw ConfigError("runs: must be at least 1");
  c.base_seed = f.uint64("base_seed", c.base_seed);
  c.output_dir = f.string("output_dir", c.output_dir.string());
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  Json doc;
  try
  {
    doc = Json::parse(in);
  }
  catch (const Json::parse_error &e)
  {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

// ------------------------------------------------------------------ experiment

Position find_optimum(const World &world, const SearchLattice &lattice, const RfEnvironment &env,
                      const TargetSpec &target)
{
  if (!target.is_bridge())
    return env.node(std::get<SingleSource>(target.kind).node_id).position;
  const auto &pts = lattice.points();
  if (pts.empty())
    throw ConfigError("no reachable legal positions to search for the optimum");
  Position best = pts.front();
  double best_v = mean_target(target, env, best, &world.grid);
  for (const Position &p : pts)
  {
    const double v = mean_target(target, env, p, &world.grid);
    if (v > best_v)
    {
      best_v = v;
      best = p;
    }
  }
  return best;
}

namespace
{

World load_world(const ExperimentConfig &cfg)
{
  try
  {
    return World(OccupancyGrid::load(cfg.map_path), cfg.footprint);
  }
  catch (const MapError &e)
  {
    throw ConfigError(std::string("map '") + cfg.map_path.string() + "': " + e.what());
  }
}

} // namespace

Experiment::Experiment(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), world_(load_world(cfg_)),
      lattice_(world_, cfg_.seeker.greedy_grid_resolution, cfg_.start)
{
  if (!is_legal(world_, cfg_.start))
    throw ConfigError("start: position is not legal on map '" + cfg_.map_path.string() + "'");
  optimum_ = find_optimum(world_, lattice_, cfg_.env, cfg_.target);
}

EpisodeSetup Experiment::setup(const ModelParams &model, Strategy strategy) const
{
  EpisodeSetup s;
  s.env = cfg_.env;
  s.target = cfg_.target;
  s.model = model;
  s.config = cfg_.seeker;
  s.start = cfg_.start;
  s.optimum = optimum_;
  s.strategy = strategy;
  return s;
}

TrajectoryLog Experiment::run_episode(std::uint64_t seed) const
{
  return run_episode(seed, cfg_.models.front(), cfg_.strategy);
}

TrajectoryLog Experiment::run_episode(std::uint64_t seed, const ModelParams &model, Strategy strategy) const
{
  const EpisodeSetup s = setup(model, strategy);
  return imseek::run_episode(world_, lattice_, s, seed);
}

// ------------------------------------------------------------------ summaries

RunSummary summarize(const TrajectoryLog &log, Position optimum, double wall_time, std::string label)
{
  RunSummary s;
  s.label = std::move(label);
  s.seed = log.seed;
  s.iterations = log.loop_iterations();
  s.path_length = log.path_length;
  s.final_distance = distance(log.final_position, optimum);
  s.refit_count = static_cast<int>(log.refits.size());
  s.wall_time = wall_time;
  s.aborted = log.aborted;
  return s;
}

Quartiles quartiles(std::vector<double> v)
{
  if (v.empty())
    return {std::nan(""), std::nan(""), std::nan("")};
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

Aggregate aggregate(std::span<const RunSummary> runs, std::string label)
{
  Aggregate a;
  a.label = std::move(label);
  a.runs = static_cast<int>(runs.size());
  std::vector<double> lengths, dists;
  double refits = 0.0;
  for (const auto &r : runs)
  {
    if (r.aborted)
      ++a.aborted;
    if (std::isfinite(r.path_length))
      lengths.push_back(r.path_length);
    if (std::isfinite(r.final_distance))
      dists.push_back(r.final_distance);
    refits += r.refit_count;
    for (std::size_t k = 0; k < kSuccessRadii.size(); ++k)
    {
      if (!r.aborted && r.final_distance <= kSuccessRadii[k])
        a.success_rate[k] += 1.0;
    }
  }
  if (!runs.empty())
  {
    for (double &s : a.success_rate)
      s /= static_cast<double>(runs.size());
    a.mean_refits = refits / static_cast<double>(runs.size());
  }
  a.path_length = quartiles(lengths);
  a.final_distance = quartiles(dists);
  return a;
}

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string &s)
{
  if (s == "nan")
    return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not a number: '" + s + "'");
  return v;
}

namespace
{

std::vector<std::string> split_csv(const std::string &line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

template <class Row, class Parse>
std::vector<Row> read_csv(std::istream &in, const std::string &expected_header, Parse parse)
{
  std::string line;
  if (!std::getline(in, line) || line != expected_header)
    throw ConfigError("csv: unexpected header '" + line + "'");
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    const auto cells = split_csv(line);
    try
    {
      rows.push_back(parse(cells));
    }
    catch (const std::exception &e)
    {
      throw ConfigError("csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

const std::string kSummaryHeader =
    "label,seed,iterations,path_length,final_distance,refit_count,wall_time,aborted";

std::string aggregate_header()
{
  std::string h = "label,runs,aborted";
  for (double r : kSuccessRadii)
    h += ",success_" + format_double(r) + "m";
  h += ",path_length_q1,path_length_median,path_length_q3";
  h += ",final_distance_q1,final_distance_median,final_distance_q3,mean_refits";
  return h;
}

const std::string kFieldHeader = "x,y,mean,std,count";

} // namespace

void write_summaries_csv(std::ostream &out, std::span<const RunSummary> runs)
{
  out << kSummaryHeader << '\n';
  for (const auto &r : runs)
  {
    out << r.label << ',' << r.seed << ',' << r.iterations << ',' << format_double(r.path_length) << ','
        << format_double(r.final_distance) << ',' << r.refit_count << ',' << format_double(r.wall_time) << ','
        << (r.aborted ? 1 : 0) << '\n';
  }
}

std::vector<RunSummary> read_summaries_csv(std::istream &in)
{
  return read_csv<RunSummary>(in, kSummaryHeader, [](const std::vector<std::string> &c) {
    if (c.size() != 8)
      throw ConfigError("expected 8 columns");
    RunSummary r;
    r.label = c[0];
    r.seed = std::stoull(c[1]);
    r.iterations = std::stoi(c[2]);
    r.path_length = parse_double(c[3]);
    r.final_distance = parse_double(c[4]);
    r.refit_count = std::stoi(c[5]);
    r.wall_time = parse_double(c[6]);
    r.aborted = c[7] == "1";
    return r;
  });
}

void write_aggregates_csv(std::ostream &out, std::span<const Aggregate> rows)
{
  out << aggregate_header() << '\n';
  for (const auto &a : rows)
  {
    out << a.label << ',' << a.runs << ',' << a.aborted;
    for (double s : a.success_rate)
      out << ',' << format_double(s);
    for (const Quartiles *q : {&a.path_length, &a.final_distance})
      out << ',' << format_double(q->q1) << ',' << format_double(q->median) << ',' << format_double(q->q3);
    out << ',' << format_double(a.mean_refits) << '\n';
  }
}

std::vector<Aggregate> read_aggregates_csv(std::istream &in)
{
  return read_csv<Aggregate>(in, aggregate_header(), [](const std::vector<std::string> &c) {
    const std::size_t expected = 3 + kSuccessRadii.size() + 7;
    if (c.size() != expected)
      throw ConfigError("expected " + std::to_string(expected) + " columns");
    Aggregate a;
    std::size_t i = 0;
    a.label = c[i++];
    a.runs = std::stoi(c[i++]);
    a.aborted = std::stoi(c[i++]);
    for (double &s : a.success_rate)
      s = parse_double(c[i++]);
    for (Quartiles *q : {&a.path_length, &a.final_distance})
    {
      q->q1 = parse_double(c[i++]);
      q->median = parse_double(c[i++]);
      q->q3 = parse_double(c[i++]);
    }
    a.mean_refits = parse_double(c[i++]);
    return a;
  });
}

// ------------------------------------------------------------------ batch

std::vector<RunSummary> run_batch(const Experiment &exp, const ModelParams &model, Strategy strategy,
                                  const BatchOptions &opt, const std::string &label)
{
  if (opt.runs < 1)
    throw ConfigError("runs: must be at least 1");
  if (opt.log_dir)
    std::filesystem::create_directories(*opt.log_dir);

  std::vector<RunSummary> out(static_cast<std::size_t>(opt.runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < opt.runs; i = next++)
    {
      const std::uint64_t seed = opt.base_seed + static_cast<std::uint64_t>(i);
      const auto t0 = std::chrono::steady_clock::now();
      RunSummary summary;
      try
      {
        const TrajectoryLog log = exp.run_episode(seed, model, strategy);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summary = summarize(log, exp.optimum(), wall, label);
        if (opt.log_dir)
        {
          std::ofstream f(*opt.log_dir / ("run_" + std::to_string(seed) + ".ndjson"));
          write_trajectory_log(f, log);
        }
      }
      catch (const std::exception &)
      {
        summary.label = label;
        summary.seed = seed;
        summary.aborted = true;
        summary.final_distance = std::nan("");
        summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      out[static_cast<std::size_t>(i)] = summary;
    }
  };

  unsigned threads = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(opt.runs));
  if (threads <= 1)
  {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  return out;
}

// ------------------------------------------------------------------ field map

std::vector<FieldCell> field_map(const Experiment &exp, double resolution, int samples_per_cell,
                                 std::uint64_t seed)
{
  if (!(resolution > 0.0))
    throw ConfigError("field-map: resolution must be positive");
  if (samples_per_cell < 1)
    throw ConfigError("field-map: samples per cell must be at least 1");
  const World &w = exp.world();
  const auto &env = exp.config().env;
  const auto &target = exp.config().target;
  const Position o = w.grid.origin();
  const int nx = static_cast<int>(std::floor(w.grid.extent_x() / resolution + 1e-9));
  const int ny = static_cast<int>(std::floor(w.grid.extent_y() / resolution + 1e-9));

  Rng rng(seed);
  std::vector<FieldCell> cells;
  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
    {
      const Position c{o.x + (i + 0.5) * resolution, o.y + (j + 0.5) * resolution};
      if (!is_legal(w, c))
        continue;
      double sum = 0.0, sum2 = 0.0;
      std::vector<double> vals(static_cast<std::size_t>(samples_per_cell));
      for (double &v : vals)
      {
        v = sample_target(target, env, c, rng, &w.grid);
        sum += v;
      }
      const double mean = sum / samples_per_cell;
      for (double v : vals)
        sum2 += (v - mean) * (v - mean);
      const double sd = samples_per_cell > 1 ? std::sqrt(sum2 / (samples_per_cell - 1)) : 0.0;
      cells.push_back(FieldCell{c, mean, sd, samples_per_cell});
    }
  }
  return cells;
}

void write_field_map_csv(std::ostream &out, std::span<const FieldCell> cells)
{
  out << kFieldHeader << '\n';
  for (const auto &c : cells)
  {
    out << format_double(c.center.x) << ',' << format_double(c.center.y) << ',' << format_double(c.mean) << ','
        << format_double(c.std) << ',' << c.count << '\n';
  }
}

std::vector<FieldCell> read_field_map_csv(std::istream &in)
{
  return read_csv<FieldCell>(in, kFieldHeader, [](const std::vector<std::string> &c) {
    if (c.size() != 5)
      throw ConfigError("expected 5 columns");
    return FieldCell{{parse_double(c[0]), parse_double(c[1])}, parse_double(c[2]), parse_double(c[3]),
                     std::stoi(c[4])};
  });
}

// ------------------------------------------------------------------ compare

Comparison compare(const Experiment &exp, const BatchOptions &opt)
{
  if (opt.runs < 2)
    throw ConfigError("compare: runs must be at least 2");
  const ModelParams &model = exp.config().models.front();
  auto with_subdir = [&](Strategy s) {
    BatchOptions o = opt;
    if (o.log_dir)
      o.log_dir = *o.log_dir / to_string(s);
    return o;
  };
  Comparison c;
  c.internal_model = run_batch(exp, model, Strategy::InternalModel, with_subdir(Strategy::InternalModel),
                               to_string(Strategy::InternalModel));
  c.gradient =
      run_batch(exp, model, Strategy::Gradient, with_subdir(Strategy::Gradient), to_string(Strategy::Gradient));
  c.internal_model_aggregate = aggregate(c.internal_model, to_string(Strategy::InternalModel));
  c.gradient_aggregate = aggregate(c.gradient, to_string(Strategy::Gradient));
  return c;
}

} // namespace imseek
