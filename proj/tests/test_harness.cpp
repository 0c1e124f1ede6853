#include "imseek/harness.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

using namespace imseek;
namespace fs = std::filesystem;

namespace
{

class TempDir
{
public:
  TempDir()
  {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("imseek_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }

private:
  fs::path path_;
};

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_open_map(const fs::path &dir, int w, int h)
{
  const fs::path p = dir / "open.map";
  std::ofstream f(p);
  test::open_grid(w, h).write(f);
  return p;
}

Json office_doc()
{
  return Json{{"map", test::data_path("office.map")},
              {"start", {3.0, 5.0}},
              {"transmitters", {{{"id", 1}, {"position", {15.0, 15.0}}}}},
              {"seeker", {{"max_iterations", 6}}},
              {"runs", 3}};
}

Json open_doc(const fs::path &map, Position source, Position start)
{
  return Json{{"map", map.string()},
              {"start", {start.x, start.y}},
              {"transmitters", {{{"id", 1}, {"position", {source.x, source.y}}}}},
              {"propagation", {{"shadowing_sigma_db", 0.0}}}};
}

std::vector<double> ranks(const std::vector<double> &v)
{
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();)
  {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double> &a, const std::vector<double> &b)
{
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i)
  {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("shipped configs load")
{
  for (const char *name : {"minimal.json", "single_source.json", "bridge.json", "decoy.json"})
  {
    CAPTURE(name);
    const auto cfg = load_config(test::config_path(name));
    CHECK(fs::exists(cfg.map_path));
    CHECK(cfg.runs >= 1);
    CHECK_NOTHROW(Experiment{cfg});
  }
  const auto minimal = load_config(test::config_path("minimal.json"));
  CHECK(minimal.models.size() == 1);
  CHECK(kind_of(minimal.models.front()) == ModelKind::Ridge);
  CHECK(minimal.seeker.error_threshold == 3.0);
  CHECK(minimal.seeker.max_iterations == 5);
  const auto bridge = load_config(test::config_path("bridge.json"));
  CHECK(bridge.target.is_bridge());
  CHECK(bridge.seeker.error_threshold == 7.0);
}

TEST_CASE("bridge targets default to the wider error threshold")
{
  Json doc = office_doc();
  doc["transmitters"].push_back({{"id", 2}, {"position", {21.0, 5.0}}});
  doc["target"] = {{"kind", "bridge"}, {"nodes", {1, 2}}};
  CHECK(parse_config(doc, ".").seeker.error_threshold == 7.0);
  doc["seeker"]["error_threshold"] = 5.0;
  CHECK(parse_config(doc, ".").seeker.error_threshold == 5.0);
}

TEST_CASE("config errors")
{
  SUBCASE("missing map names the path")
  {
    Json doc = office_doc();
    doc["map"] = "/nonexistent/nowhere.map";
    try
    {
      Experiment exp(parse_config(doc, "."));
      FAIL("expected ConfigError");
    }
    catch (const ConfigError &e)
    {
      CHECK(std::string(e.what()).find("/nonexistent/nowhere.map") != std::string::npos);
    }
  }
  SUBCASE("runs = 0")
  {
    Json doc = office_doc();
    doc["runs"] = 0;
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
  }
  SUBCASE("unknown key is named")
  {
    Json doc = office_doc();
    doc["sekeer"] = Json::object();
    try
    {
      parse_config(doc, ".");
      FAIL("expected ConfigError");
    }
    catch (const ConfigError &e)
    {
      CHECK(std::string(e.what()).find("sekeer") != std::string::npos);
    }
  }
  SUBCASE("wrong types and bad values")
  {
    Json doc = office_doc();
    doc["start"] = "here";
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
    doc = office_doc();
    doc["seeker"]["step_width"] = -1.0;
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
    doc = office_doc();
    doc["target"] = {{"kind", "single"}, {"node", 9}};
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
    doc = office_doc();
    doc["transmitters"].push_back({{"id", 1}, {"position", {1.0, 1.0}}});
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
  }
  SUBCASE("illegal start")
  {
    Json doc = office_doc();
    doc["start"] = {0.0, 0.0};
    CHECK_THROWS_AS(Experiment(parse_config(doc, ".")), ConfigError);
  }
  SUBCASE("unreadable files")
  {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    TempDir dir;
    const fs::path p = dir.path() / "broken.json";
    std::ofstream(p) << "{\"map\": ";
    CHECK_THROWS_AS(load_config(p), ConfigError);
  }
}

TEST_CASE("relative map paths resolve against the config file")
{
  const auto cfg = load_config(test::config_path("minimal.json"));
  CHECK(fs::equivalent(cfg.map_path, test::data_path("office.map")));
}

TEST_CASE("trajectory logs round-trip")
{
  const Experiment exp(parse_config(office_doc(), "."));
  for (std::uint64_t seed : {1, 2})
  {
    const TrajectoryLog log = exp.run_episode(seed);
    const std::string text = trajectory_log_to_string(log);
    std::istringstream in(text);
    const TrajectoryLog back = read_trajectory_log(in);
    CHECK(trajectory_log_to_string(back) == text);
    CHECK(back.seed == log.seed);
    CHECK(back.final_position == log.final_position);
    CHECK(back.path_length == log.path_length);
    REQUIRE(back.samples.size() == log.samples.size());
    REQUIRE(back.iterations.size() == log.iterations.size());
    for (std::size_t i = 0; i < log.iterations.size(); ++i)
    {
      CHECK(back.iterations[i].waypoint == log.iterations[i].waypoint);
      CHECK(back.iterations[i].action == log.iterations[i].action);
      CHECK(back.iterations[i].refit == log.iterations[i].refit);
    }
    CHECK(back.refits.size() == log.refits.size());
  }
  std::istringstream junk("{\"record\": \"sample\"}\n");
  CHECK_THROWS(read_trajectory_log(junk));
}

TEST_CASE("replaying a logged seed and config reproduces the log")
{
  const Experiment exp(parse_config(office_doc(), "."));
  const TrajectoryLog log = exp.run_episode(7);
  const std::string text = trajectory_log_to_string(log);
  std::istringstream in(text);
  const TrajectoryLog back = read_trajectory_log(in);

  EpisodeSetup setup = exp.setup(back.model, back.strategy);
  setup.config = back.config;
  setup.target = back.target;
  setup.start = back.start;
  const TrajectoryLog replay = run_episode(exp.world(), exp.lattice(), setup, back.seed);
  CHECK(trajectory_log_to_string(replay) == text);
}

TEST_CASE("summary and aggregate tables round-trip")
{
  const Experiment exp(parse_config(office_doc(), "."));
  BatchOptions opt;
  opt.runs = 3;
  const auto runs = run_batch(exp, RidgeParams{}, Strategy::InternalModel, opt, "ridge");
  REQUIRE(runs.size() == 3);

  std::ostringstream s1;
  write_summaries_csv(s1, runs);
  std::istringstream in1(s1.str());
  const auto back = read_summaries_csv(in1);
  REQUIRE(back.size() == runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i)
  {
    CHECK(back[i].label == runs[i].label);
    CHECK(back[i].seed == runs[i].seed);
    CHECK(back[i].iterations == runs[i].iterations);
    CHECK(back[i].path_length == runs[i].path_length);
    CHECK(back[i].final_distance == runs[i].final_distance);
    CHECK(back[i].refit_count == runs[i].refit_count);
    CHECK(back[i].wall_time == runs[i].wall_time);
    CHECK(back[i].aborted == runs[i].aborted);
  }

  // aggregate recomputed from the per-run file matches the written one exactly
  const std::vector<Aggregate> aggs{aggregate(runs, "ridge")};
  std::ostringstream s2;
  write_aggregates_csv(s2, aggs);
  std::ostringstream s3;
  const std::vector<Aggregate> again{aggregate(back, "ridge")};
  write_aggregates_csv(s3, again);
  CHECK(s2.str() == s3.str());
  std::istringstream in2(s2.str());
  std::ostringstream s4;
  write_aggregates_csv(s4, read_aggregates_csv(in2));
  CHECK(s4.str() == s2.str());

  std::istringstream bad("not,a,header\n");
  CHECK_THROWS_AS(read_summaries_csv(bad), ConfigError);
}

TEST_CASE("run summaries are consistent with their logs")
{
  const Experiment exp(parse_config(office_doc(), "."));
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
  {
    const auto log = exp.run_episode(seed);
    const auto s = summarize(log, exp.optimum(), 0.5, "x");
    CHECK(s.seed == seed);
    CHECK(s.iterations == log.loop_iterations());
    CHECK(s.path_length >= distance(log.start, log.final_position) - 1e-9);
    CHECK(s.final_distance == doctest::Approx(distance(log.final_position, Position{15.0, 15.0})));
    CHECK(std::isfinite(s.path_length));
    CHECK(std::isfinite(s.final_distance));
  }
}

TEST_CASE("quartiles and aggregates")
{
  const auto q = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q3 == doctest::Approx(3.25));
  CHECK(quartiles({5.0}).median == 5.0);

  RunSummary one;
  one.seed = 4;
  one.path_length = 12.5;
  one.final_distance = 1.5;
  one.refit_count = 3;
  const Aggregate a = aggregate(std::span<const RunSummary>(&one, 1), "one");
  CHECK(a.runs == 1);
  CHECK(a.aborted == 0);
  CHECK(a.success_rate[0] == 0.0); // 0.5 m
  CHECK(a.success_rate[1] == 0.0); // 1 m
  CHECK(a.success_rate[2] == 1.0); // 2 m
  CHECK(a.success_rate[3] == 1.0); // 3 m
  CHECK(a.path_length.q1 == 12.5);
  CHECK(a.path_length.median == 12.5);
  CHECK(a.path_length.q3 == 12.5);
  CHECK(a.final_distance.median == 1.5);
  CHECK(a.mean_refits == 3.0);

  std::vector<RunSummary> mixed(4, one);
  mixed[1].aborted = true;
  mixed[1].final_distance = std::nan("");
  mixed[2].final_distance = 0.2;
  const Aggregate m = aggregate(mixed);
  CHECK(m.aborted == 1);
  CHECK(m.success_rate[0] == 0.25);
  CHECK(m.success_rate[2] == 0.75);
}

TEST_CASE("batch runs equal separate runs")
{
  TempDir dir;
  const Experiment exp(parse_config(office_doc(), "."));
  BatchOptions opt;
  opt.base_seed = 11;
  opt.runs = 3;
  opt.threads = 2;
  opt.log_dir = dir.path();
  const auto runs = run_batch(exp, exp.config().models.front(), Strategy::InternalModel, opt);
  for (int i = 0; i < 3; ++i)
  {
    const std::uint64_t seed = 11 + static_cast<std::uint64_t>(i);
    CHECK(runs[static_cast<std::size_t>(i)].seed == seed);
    const auto file = dir.path() / ("run_" + std::to_string(seed) + ".ndjson");
    REQUIRE(fs::exists(file));
    CHECK(slurp(file) == trajectory_log_to_string(exp.run_episode(seed)));
  }
  opt.runs = 0;
  CHECK_THROWS_AS(run_batch(exp, RidgeParams{}, Strategy::InternalModel, opt), ConfigError);
}

TEST_CASE("field map: noiseless single source falls off with distance")
{
  TempDir dir;
  const fs::path map = write_open_map(dir.path(), 80, 60); // 20 x 15 m
  const Position source{12.0, 7.0};
  const Experiment exp(parse_config(open_doc(map, source, {3.0, 3.0}), "."));
  const auto cells = field_map(exp, 0.5, 1, 1);
  REQUIRE(cells.size() > 500);
  std::vector<double> d;
  std::vector<double> v;
  for (const auto &c : cells)
  {
    d.push_back(distance(c.center, source));
    v.push_back(c.mean);
    CHECK(c.count == 1);
    CHECK(c.std == 0.0);
    CHECK(c.mean == mean_target(exp.config().target, exp.config().env, c.center, &exp.world().grid));
  }
  const double rho = spearman(d, v);
  MESSAGE("spearman rho: " << rho);
  CHECK(rho < -0.99);

  std::ostringstream out;
  write_field_map_csv(out, cells);
  std::istringstream in(out.str());
  const auto back = read_field_map_csv(in);
  REQUIRE(back.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
  {
    CHECK(back[i].center == cells[i].center);
    CHECK(back[i].mean == cells[i].mean);
    CHECK(back[i].std == cells[i].std);
    CHECK(back[i].count == cells[i].count);
  }
  CHECK_THROWS_AS(field_map(exp, 0.0, 1, 1), ConfigError);
  CHECK_THROWS_AS(field_map(exp, 0.5, 0, 1), ConfigError);
}

TEST_CASE("field map: noisy cells have the shadowing spread")
{
  TempDir dir;
  const fs::path map = write_open_map(dir.path(), 40, 40);
  Json doc = open_doc(map, {5.0, 5.0}, {2.0, 2.0});
  doc["propagation"]["shadowing_sigma_db"] = 4.0;
  const Experiment exp(parse_config(doc, "."));
  const auto cells = field_map(exp, 1.0, 400, 3);
  double mean_std = 0.0;
  for (const auto &c : cells)
    mean_std += c.std;
  mean_std /= static_cast<double>(cells.size());
  CHECK(mean_std == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("field map: symmetric bridge peaks at the midpoint")
{
  TempDir dir;
  const fs::path map = write_open_map(dir.path(), 80, 40); // 20 x 10 m
  Json doc = open_doc(map, {4.0, 5.0}, {2.0, 2.0});
  doc["transmitters"].push_back({{"id", 2}, {"position", {16.0, 5.0}}});
  doc["target"] = {{"kind", "bridge"}, {"nodes", {1, 2}}};
  const Experiment exp(parse_config(doc, "."));
  const double res = 0.5;
  const auto cells = field_map(exp, res, 1, 1);
  const auto best = std::max_element(cells.begin(), cells.end(),
                                     [](const FieldCell &a, const FieldCell &b) { return a.mean < b.mean; });
  CHECK(std::abs(best->center.x - 10.0) <= res);
  CHECK(std::abs(best->center.y - 5.0) <= res);
  CHECK(distance(exp.optimum(), {10.0, 5.0}) <= exp.config().seeker.greedy_grid_resolution);
}

TEST_CASE("compare feeds the same seeds to both strategies")
{
  TempDir dir;
  const fs::path map = write_open_map(dir.path(), 80, 40); // 20 x 10 m
  Json doc = open_doc(map, {15.0, 5.0}, {4.0, 5.0});
  doc["seeker"] = {{"max_iterations", 100}, {"stop_radius", 1.0}};
  doc["runs"] = 4;
  const Experiment exp(parse_config(doc, "."));
  BatchOptions opt;
  opt.runs = 4;
  opt.log_dir = dir.path() / "logs";
  const Comparison c = compare(exp, opt);
  REQUIRE(c.internal_model.size() == 4);
  REQUIRE(c.gradient.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(c.internal_model[i].seed == c.gradient[i].seed);
  CHECK(fs::exists(dir.path() / "logs" / "internal_model" / "run_1.ndjson"));
  CHECK(fs::exists(dir.path() / "logs" / "gradient" / "run_1.ndjson"));

  // noiseless convex field: both succeed with comparable path lengths
  CHECK(c.internal_model_aggregate.success_rate[1] == 1.0);
  CHECK(c.gradient_aggregate.success_rate[1] == 1.0);
  const double a = c.internal_model_aggregate.path_length.median;
  const double b = c.gradient_aggregate.path_length.median;
  MESSAGE("median path internal model " << a << " m, gradient " << b << " m");
  CHECK(std::max(a, b) <= 2.0 * std::min(a, b));

  opt.runs = 1;
  CHECK_THROWS_AS(compare(exp, opt), ConfigError);
}
