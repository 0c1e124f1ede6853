#ifndef IMSEEK_SEEKER_HPP_
#define IMSEEK_SEEKER_HPP_

#include "imseek/geometry.hpp"
#include "imseek/models.hpp"
#include "imseek/rf_env.hpp"
#include "imseek/targets.hpp"
#include "imseek/world.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace imseek
{

struct SeekerConfig
{
  double step_width{1.0};
  double epsilon_floor{0.1};
  double epsilon_span{0.9};
  double anneal_alpha{std::log(9.0 / 4.0) / 5.0}; // epsilon(5) == 0.5
  double error_threshold{3.0};
  double validation_window{1.0};
  double novelty_min_dist{0.35};
  double greedy_grid_resolution{0.25};
  double initial_step_factor{2.0};
  int max_iterations{60};
  std::optional<double> stop_radius; // evaluation only

  double speed{0.3};      // m/s while driving
  double dwell_time{1.0}; // seconds spent measuring at each waypoint
  double line_search_increment{0.1};
  double novelty_cutoff_factor{4.0}; // candidates within this many step widths
  std::size_t training_cap{kDefaultTrainingCap};
  double gradient_radius{2.0}; // plane-fit radius of the gradient baseline
  int max_replans{10};

  void validate() const;
};

/// Annealed exploration probability epsilon_span * exp(-anneal_alpha * n) + epsilon_floor.
double epsilon(int n, const SeekerConfig &cfg);

enum class Strategy
{
  InternalModel,
  Gradient
};

enum class ActionKind
{
  Initial,
  Greedy,
  Epsilon,
  Gradient
};

const char *to_string(Strategy s);
const char *to_string(ActionKind a);
Strategy strategy_from_string(const std::string &s);
ActionKind action_from_string(const std::string &s);

/// Legal positions the seeker may target: lattice points at `resolution`
/// (cell centers of a virtual grid), optionally restricted to the free space
/// connected to `reachable_from`.
class SearchLattice
{
public:
  SearchLattice(const World &world, double resolution, std::optional<Position> reachable_from = std::nullopt);

  const std::vector<Position> &points() const { return points_; }
  double resolution() const { return resolution_; }

private:
  double resolution_;
  std::vector<Position> points_;
};

struct RefitEvent
{
  int n{0};
  double t{0.0};
  Position position;
  double window_mean{0.0};
  double prediction{std::nan("")};
};

struct SeekerState
{
  SeekerState(std::uint64_t seed, Position start);

  int n{0};
  double now{0.0};
  Position position;
  std::vector<TargetSample> samples; // time-sorted
  std::shared_ptr<const ForwardModel> model;
  std::vector<TimedPosition> trajectory;
  std::vector<RefitEvent> refits;
  Rng rng;
};

class NoRecentSamples : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Decision
{
  Kept,
  Refit
};

struct ValidationResult
{
  Decision decision{Decision::Kept};
  double window_mean{0.0};
  double prediction{std::nan("")}; // NaN without a model
  std::size_t window_count{0};
  bool fit_failed{false}; // refit attempted but the previous model was retained
};

/// Mean target over [now - validation_window, now] against the prediction
/// at the current position; refits on the subsampled full store when there
/// is no model or the absolute error exceeds error_threshold.
ValidationResult validate_and_maybe_refit(SeekerState &state, const SeekerConfig &cfg, const ModelParams &params);

/// Grid-search argmax of the model over the lattice. Ties go to the point
/// nearest `current`, then lowest (x, y).
Position model_argmax(const ForwardModel &model, const SearchLattice &lattice, Position current);

struct WaypointChoice
{
  Position position;
  bool fallback{false}; // greedy step impossible, novelty step taken instead
  bool relaxed{false};  // novelty constraint dropped for lack of candidates
};

WaypointChoice greedy_waypoint(SeekerState &state, const SeekerConfig &cfg, const World &world,
                               const SearchLattice &lattice);

struct NoveltyCandidate
{
  Position position;
  double weight{0.0}; // unnormalized exp(-distance)
};

/// Candidate set and weights the novelty step samples from.
std::vector<NoveltyCandidate> novelty_candidates(const SeekerState &state, const SeekerConfig &cfg,
                                                 const SearchLattice &lattice, bool &relaxed);

WaypointChoice novelty_waypoint(SeekerState &state, const SeekerConfig &cfg, const World &world,
                                const SearchLattice &lattice);

/// Plane fit (unregularized, min-norm) to samples within gradient_radius and
/// one step along the fitted gradient. Random direction when the local data
/// cannot define a gradient.
WaypointChoice gradient_baseline_step(SeekerState &state, const SeekerConfig &cfg, const World &world);

struct IterationRecord
{
  int n{0};
  double t{0.0}; // decision time
  ActionKind action{ActionKind::Initial};
  Position waypoint;
  std::vector<Position> path; // as driven, starting at the previous position
  double epsilon{std::nan("")};
  double draw{std::nan("")};
  bool refit{false};
  bool fit_failed{false};
  bool fallback{false};
  double window_mean{std::nan("")};
  double prediction{std::nan("")};
};

/// Replayable record of one episode.
struct TrajectoryLog
{
  std::uint64_t seed{0};
  Strategy strategy{Strategy::InternalModel};
  SeekerConfig config;
  ModelParams model{RidgeParams{}};
  TargetSpec target;
  Position start;
  std::vector<IterationRecord> iterations; // initial move first
  std::vector<RefitEvent> refits;
  std::vector<TargetSample> samples;
  Position final_position;
  double end_time{0.0};
  double path_length{0.0};
  bool aborted{false};
  std::string abort_reason;

  int loop_iterations() const;
};

struct EpisodeSetup
{
  RfEnvironment env;
  TargetSpec target;
  ModelParams model{RidgeParams{}};
  SeekerConfig config;
  Position start;
  std::optional<Position> optimum; // evaluation only, used by stop_radius
  Strategy strategy{Strategy::InternalModel};
};

TrajectoryLog run_episode(const World &world, const SearchLattice &lattice, const EpisodeSetup &setup,
                          std::uint64_t seed);

/// Builds the lattice (reachable from setup.start) and runs the episode.
TrajectoryLog run_episode(const World &world, const EpisodeSetup &setup, std::uint64_t seed);

} // namespace imseek

#endif // IMSEEK_SEEKER_HPP_
