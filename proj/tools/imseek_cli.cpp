// imseek: experiment runner for the internal-model source seeker.

#include "imseek/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace imseek;

namespace
{

constexpr int kExitConfigError = 1;
constexpr int kExitAborted = 2;

fs::path output_dir(const ExperimentConfig &cfg, const std::string &flag)
{
  if (!flag.empty())
    return flag;
  if (const char *env = std::getenv("IMSEEK_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return cfg.output_dir;
}

std::ofstream open_out(const fs::path &p)
{
  std::ofstream f(p);
  if (!f)
    throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

std::vector<std::string> model_labels(const std::vector<ModelParams> &models)
{
  std::map<std::string, int> seen;
  std::vector<std::string> labels;
  for (const auto &m : models)
  {
    std::string base = to_string(kind_of(m));
    const int k = seen[base]++;
    labels.push_back(k == 0 ? base : base + "_" + std::to_string(k));
  }
  return labels;
}

void print_aggregate(const Aggregate &a)
{
  std::cout << a.label << ": runs=" << a.runs << " aborted=" << a.aborted;
  for (std::size_t k = 0; k < kSuccessRadii.size(); ++k)
    std::cout << " success@" << format_double(kSuccessRadii[k]) << "m=" << format_double(a.success_rate[k]);
  std::cout << " median_path=" << format_double(a.path_length.median)
            << " median_final_distance=" << format_double(a.final_distance.median) << "\n";
}

struct Options
{
  std::string config;
  std::string out;
  std::uint64_t seed{0};
  bool seed_given{false};
  int runs{-1};
  unsigned threads{0};
  bool no_logs{false};
  double resolution{0.5};
  int samples{1};
};

int cmd_run(const Options &o)
{
  const Experiment exp(load_config(o.config));
  const fs::path out = output_dir(exp.config(), o.out);
  fs::create_directories(out);
  const std::uint64_t seed = o.seed_given ? o.seed : exp.config().base_seed;

  const auto t0 = std::chrono::steady_clock::now();
  const TrajectoryLog log = exp.run_episode(seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const RunSummary summary = summarize(log, exp.optimum(), wall, to_string(kind_of(exp.config().models.front())));

  const std::string stem = "run_" + std::to_string(seed);
  {
    auto f = open_out(out / (stem + ".ndjson"));
    write_trajectory_log(f, log);
  }
  {
    auto f = open_out(out / (stem + "_summary.csv"));
    write_summaries_csv(f, std::span<const RunSummary>(&summary, 1));
  }
  std::cout << "seed=" << seed << " iterations=" << summary.iterations
            << " path_length=" << format_double(summary.path_length)
            << " final_distance=" << format_double(summary.final_distance) << " refits=" << summary.refit_count
            << "\n";
  if (log.aborted)
  {
    std::cerr << "episode aborted: " << log.abort_reason << "\n";
    return kExitAborted;
  }
  return 0;
}

int cmd_batch(const Options &o)
{
  ExperimentConfig cfg = load_config(o.config);
  if (o.runs > 0)
    cfg.runs = o.runs;
  const Experiment exp(cfg);
  const fs::path out = output_dir(exp.config(), o.out);
  fs::create_directories(out);

  const auto labels = model_labels(exp.config().models);
  std::vector<RunSummary> all;
  std::vector<Aggregate> aggs;
  for (std::size_t m = 0; m < labels.size(); ++m)
  {
    BatchOptions opt;
    opt.base_seed = exp.config().base_seed;
    opt.runs = exp.config().runs;
    opt.threads = o.threads;
    if (!o.no_logs)
      opt.log_dir = out / "logs" / labels[m];
    auto runs = run_batch(exp, exp.config().models[m], exp.config().strategy, opt, labels[m]);
    aggs.push_back(aggregate(runs, labels[m]));
    all.insert(all.end(), runs.begin(), runs.end());
    print_aggregate(aggs.back());
  }
  {
    auto f = open_out(out / "batch_runs.csv");
    write_summaries_csv(f, all);
  }
  {
    auto f = open_out(out / "batch_aggregate.csv");
    write_aggregates_csv(f, aggs);
  }
  const bool any_aborted = std::any_of(all.begin(), all.end(), [](const RunSummary &r) { return r.aborted; });
  return any_aborted ? kExitAborted : 0;
}

int cmd_compare(const Options &o)
{
  ExperimentConfig cfg = load_config(o.config);
  if (o.runs >= 0)
    cfg.runs = o.runs;
  if (cfg.runs < 2)
    throw ConfigError("compare: runs must be at least 2");
  const Experiment exp(cfg);
  const fs::path out = output_dir(exp.config(), o.out);
  fs::create_directories(out);

  BatchOptions opt;
  opt.base_seed = exp.config().base_seed;
  opt.runs = exp.config().runs;
  opt.threads = o.threads;
  if (!o.no_logs)
    opt.log_dir = out / "logs";
  const Comparison c = compare(exp, opt);

  std::vector<RunSummary> all = c.internal_model;
  all.insert(all.end(), c.gradient.begin(), c.gradient.end());
  const std::vector<Aggregate> aggs{c.internal_model_aggregate, c.gradient_aggregate};
  {
    auto f = open_out(out / "compare_runs.csv");
    write_summaries_csv(f, all);
  }
  {
    auto f = open_out(out / "compare_aggregate.csv");
    write_aggregates_csv(f, aggs);
  }
  for (const auto &a : aggs)
    print_aggregate(a);
  const bool any_aborted = std::any_of(all.begin(), all.end(), [](const RunSummary &r) { return r.aborted; });
  return any_aborted ? kExitAborted : 0;
}

int cmd_field_map(const Options &o)
{
  const Experiment exp(load_config(o.config));
  const fs::path out = output_dir(exp.config(), o.out);
  fs::create_directories(out);
  const std::uint64_t seed = o.seed_given ? o.seed : exp.config().base_seed;
  const auto cells = field_map(exp, o.resolution, o.samples, seed);
  auto f = open_out(out / "field_map.csv");
  write_field_map_csv(f, cells);
  std::cout << "cells=" << cells.size() << " -> " << (out / "field_map.csv").string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Internal-model source seeking simulator"};
  app.require_subcommand(1);
  Options o;

  auto *run = app.add_subcommand("run", "Run one episode and write its log and summary");
  run->add_option("--config", o.config, "Experiment config (JSON)")->required();
  run->add_option("--seed", o.seed, "Episode seed (default: base_seed)")->each([&](const std::string &) {
    o.seed_given = true;
  });
  run->add_option("--out", o.out, "Output directory");

  auto *batch = app.add_subcommand("batch", "Monte-Carlo batch over consecutive seeds");
  batch->add_option("--config", o.config, "Experiment config (JSON)")->required();
  batch->add_option("--runs", o.runs, "Number of runs (default: config runs)")->check(CLI::PositiveNumber);
  batch->add_option("--out", o.out, "Output directory");
  batch->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  batch->add_flag("--no-logs", o.no_logs, "Skip per-run trajectory logs");

  auto *fmap = app.add_subcommand("field-map", "Export noisy target statistics per map cell");
  fmap->add_option("--config", o.config, "Experiment config (JSON)")->required();
  fmap->add_option("--resolution", o.resolution, "Cell size in meters")->required();
  fmap->add_option("--samples", o.samples, "Samples per cell")->required();
  fmap->add_option("--seed", o.seed, "Noise seed (default: base_seed)")->each([&](const std::string &) {
    o.seed_given = true;
  });
  fmap->add_option("--out", o.out, "Output directory");

  auto *cmp = app.add_subcommand("compare", "Internal-model seeker vs plane-fit gradient baseline");
  cmp->add_option("--config", o.config, "Experiment config (JSON)")->required();
  cmp->add_option("--runs", o.runs, "Number of runs (default: config runs)");
  cmp->add_option("--out", o.out, "Output directory");
  cmp->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmp->add_flag("--no-logs", o.no_logs, "Skip per-run trajectory logs");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e) == 0 ? 0 : kExitConfigError;
  }

  try
  {
    if (*run)
      return cmd_run(o);
    if (*batch)
      return cmd_batch(o);
    if (*fmap)
      return cmd_field_map(o);
    return cmd_compare(o);
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAborted;
  }
}
