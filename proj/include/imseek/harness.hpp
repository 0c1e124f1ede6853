#ifndef IMSEEK_HARNESS_HPP_
#define IMSEEK_HARNESS_HPP_

#include "imseek/seeker.hpp"
#include "imseek/serialization.hpp"
#include "imseek/world.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imseek
{

struct ExperimentConfig
{
  std::filesystem::path map_path;
  Position start;
  RobotFootprint footprint;
  RfEnvironment env;
  TargetSpec target;
  std::vector<ModelParams> models{RidgeParams{}}; // batch compares all of them
  SeekerConfig seeker;
  Strategy strategy{Strategy::InternalModel};
  int runs{1};
  std::uint64_t base_seed{1};
  std::filesystem::path output_dir{"out"};
};

/// Relative paths in the document are resolved against base_dir.
ExperimentConfig parse_config(const Json &doc, const std::filesystem::path &base_dir);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Evaluation-only optimum: the transmitter position for single-source
/// targets, the noise-free lattice argmax for bridge targets.
Position find_optimum(const World &world, const SearchLattice &lattice, const RfEnvironment &env,
                      const TargetSpec &target);

/// Loaded, validated experiment shared read-only by all of its episodes.
class Experiment
{
public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig &config() const { return cfg_; }
  const World &world() const { return world_; }
  const SearchLattice &lattice() const { return lattice_; }
  Position optimum() const { return optimum_; }

  EpisodeSetup setup(const ModelParams &model, Strategy strategy) const;
  TrajectoryLog run_episode(std::uint64_t seed) const;
  TrajectoryLog run_episode(std::uint64_t seed, const ModelParams &model, Strategy strategy) const;

private:
  ExperimentConfig cfg_;
  World world_;
  SearchLattice lattice_;
  Position optimum_;
};

struct RunSummary
{
  std::string label;
  std::uint64_t seed{0};
  int iterations{0};
  double path_length{0.0};
  double final_distance{0.0};
  int refit_count{0};
  double wall_time{0.0};
  bool aborted{false};
};

RunSummary summarize(const TrajectoryLog &log, Position optimum, double wall_time, std::string label = "");

inline constexpr std::array<double, 4> kSuccessRadii{0.5, 1.0, 2.0, 3.0};

struct Quartiles
{
  double q1{0.0};
  double median{0.0};
  double q3{0.0};
};

/// Linear-interpolation quartiles of the values.
Quartiles quartiles(std::vector<double> values);

struct Aggregate
{
  std::string label;
  int runs{0};
  int aborted{0};
  std::array<double, kSuccessRadii.size()> success_rate{}; // aborted runs count as failures
  Quartiles path_length;
  Quartiles final_distance;
  double mean_refits{0.0};
};

Aggregate aggregate(std::span<const RunSummary> runs, std::string label = "");

void write_summaries_csv(std::ostream &out, std::span<const RunSummary> runs);
std::vector<RunSummary> read_summaries_csv(std::istream &in);
void write_aggregates_csv(std::ostream &out, std::span<const Aggregate> rows);
std::vector<Aggregate> read_aggregates_csv(std::istream &in);

struct BatchOptions
{
  std::uint64_t base_seed{1};
  int runs{1};
  unsigned threads{0}; // 0: hardware concurrency
  std::optional<std::filesystem::path> log_dir;
};

/// Seeds base_seed .. base_seed + runs - 1; parallel across runs, results in
/// seed order. Episode exceptions mark the run aborted instead of failing
/// the batch.
std::vector<RunSummary> run_batch(const Experiment &exp, const ModelParams &model, Strategy strategy,
                                  const BatchOptions &opt, const std::string &label = "");

struct FieldCell
{
  Position center;
  double mean{0.0};
  double std{0.0};
  int count{0};
};

/// Noisy target statistics at every legal cell center of a virtual grid
/// with the given resolution.
std::vector<FieldCell> field_map(const Experiment &exp, double resolution, int samples_per_cell,
                                 std::uint64_t seed);
void write_field_map_csv(std::ostream &out, std::span<const FieldCell> cells);
std::vector<FieldCell> read_field_map_csv(std::istream &in);

struct Comparison
{
  std::vector<RunSummary> internal_model;
  std::vector<RunSummary> gradient;
  Aggregate internal_model_aggregate;
  Aggregate gradient_aggregate;
};

/// Same seeds through the internal-model seeker and the gradient baseline.
Comparison compare(const Experiment &exp, const BatchOptions &opt);

/// Round-trip float text.
std::string format_double(double v);
double parse_double(const std::string &s);

} // namespace imseek

#endif // IMSEEK_HARNESS_HPP_
