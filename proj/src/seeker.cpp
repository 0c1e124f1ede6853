#include "imseek/seeker.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <deque>
#include <limits>
#include <numbers>

namespace imseek
{

void SeekerConfig::validate() const
{
  if (!(step_width > 0.0))
    throw std::invalid_argument("step_width must be positive");
  if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0))
    throw std::invalid_argument("epsilon_floor must lie in (0, 1)");
  if (!(epsilon_span >= 0.0 && epsilon_span + epsilon_floor <= 1.0))
    throw std::invalid_argument("epsilon_span must be non-negative with epsilon_span + epsilon_floor <= 1");
  if (!(anneal_alpha > 0.0))
    throw std::invalid_argument("anneal_alpha must be positive");
  if (!(error_threshold > 0.0))
    throw std::invalid_argument("error_threshold must be positive");
  if (!(validation_window > 0.0))
    throw std::invalid_argument("validation_window must be positive");
  if (!(novelty_min_dist >= 0.0))
    throw std::invalid_argument("novelty_min_dist must be non-negative");
  if (!(greedy_grid_resolution > 0.0))
    throw std::invalid_argument("greedy_grid_resolution must be positive");
  if (!(initial_step_factor > 0.0))
    throw std::invalid_argument("initial_step_factor must be positive");
  if (max_iterations < 0)
    throw std::invalid_argument("max_iterations must be non-negative");
  if (stop_radius && !(*stop_radius > 0.0))
    throw std::invalid_argument("stop_radius must be positive");
  if (!(speed > 0.0))
    throw std::invalid_argument("speed must be positive");
  if (!(dwell_time >= 0.0))
    throw std::invalid_argument("dwell_time must be non-negative");
  if (!(line_search_increment > 0.0))
    throw std::invalid_argument("line_search_increment must be positive");
  if (!(novelty_cutoff_factor > 0.0))
    throw std::invalid_argument("novelty_cutoff_factor must be positive");
  if (training_cap < 1)
    throw std::invalid_argument("training_cap must be at least 1");
  if (!(gradient_radius > 0.0))
    throw std::invalid_argument("gradient_radius must be positive");
  if (max_replans < 1)
    throw std::invalid_argument("max_replans must be at least 1");
}

double epsilon(int n, const SeekerConfig &cfg)
{
  if (n < 0)
    throw std::invalid_argument("epsilon: iteration must be non-negative");
  return cfg.epsilon_span * std::exp(-cfg.anneal_alpha * n) + cfg.epsilon_floor;
}

const char *to_string(Strategy s)
{
  return s == Strategy::InternalModel ? "internal_model" : "gradient";
}

const char *to_string(ActionKind a)
{
  switch (a)
  {
  case ActionKind::Initial:
    return "initial";
  case ActionKind::Greedy:
    return "greedy";
  case ActionKind::Epsilon:
    return "epsilon";
  case ActionKind::Gradient:
    return "gradient";
  }
  return "?";
}

Strategy strategy_from_string(const std::string &s)
{
  if (s == "internal_model")
    return Strategy::InternalModel;
  if (s == "gradient")
    return Strategy::Gradient;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

ActionKind action_from_string(const std::string &s)
{
  for (auto a : {ActionKind::Initial, ActionKind::Greedy, ActionKind::Epsilon, ActionKind::Gradient})
  {
    if (s == to_string(a))
      return a;
  }
  throw std::invalid_argument("unknown action '" + s + "'");
}

// ------------------------------------------------------------------ lattice

SearchLattice::SearchLattice(const World &world, double resolution, std::optional<Position> reachable_from)
    : resolution_(resolution)
{
  if (!(resolution > 0.0))
    throw std::invalid_argument("lattice resolution must be positive");
  const Position o = world.grid.origin();
  const int nx = static_cast<int>(std::floor(world.grid.extent_x() / resolution + 1e-9));
  const int ny = static_cast<int>(std::floor(world.grid.extent_y() / resolution + 1e-9));
  auto at = [&](int i, int j) { return Position{o.x + (i + 0.5) * resolution, o.y + (j + 0.5) * resolution}; };

  std::vector<char> legal(static_cast<std::size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
      legal[static_cast<std::size_t>(j) * nx + i] = is_legal(world, at(i, j)) ? 1 : 0;
  }

  std::vector<char> keep = legal;
  if (reachable_from)
  {
    std::fill(keep.begin(), keep.end(), 0);
    std::deque<int> queue;
    const Position s = *reachable_from;
    const int si = static_cast<int>(std::floor((s.x - o.x) / resolution));
    const int sj = static_cast<int>(std::floor((s.y - o.y) / resolution));
    for (int j = sj - 1; j <= sj + 1; ++j)
    {
      for (int i = si - 1; i <= si + 1; ++i)
      {
        if (i < 0 || j < 0 || i >= nx || j >= ny)
          continue;
        const int k = j * nx + i;
        if (legal[static_cast<std::size_t>(k)] && is_segment_legal(world.grid, world.footprint, s, at(i, j)))
        {
          keep[static_cast<std::size_t>(k)] = 1;
          queue.push_back(k);
        }
      }
    }
    while (!queue.empty())
    {
      const int k = queue.front();
      queue.pop_front();
      const int i = k % nx;
      const int j = k / nx;
      for (int dj = -1; dj <= 1; ++dj)
      {
        for (int di = -1; di <= 1; ++di)
        {
          const int ni = i + di;
          const int nj = j + dj;
          if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= nx || nj >= ny)
            continue;
          const int nk = nj * nx + ni;
          if (keep[static_cast<std::size_t>(nk)] || !legal[static_cast<std::size_t>(nk)])
            continue;
          if (!is_segment_legal(world.grid, world.footprint, at(i, j), at(ni, nj)))
            continue;
          keep[static_cast<std::size_t>(nk)] = 1;
          queue.push_back(nk);
        }
      }
    }
  }

  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
    {
      if (keep[static_cast<std::size_t>(j) * nx + i])
        points_.push_back(at(i, j));
    }
  }
}

// ------------------------------------------------------------------ state

SeekerState::SeekerState(std::uint64_t seed, Position start) : position(start), rng(seed)
{
  trajectory.push_back(TimedPosition{0.0, start});
}

ValidationResult validate_and_maybe_refit(SeekerState &state, const SeekerConfig &cfg, const ModelParams &params)
{
  ValidationResult result;
  const double lo = state.now - cfg.validation_window;
  double sum = 0.0;
  for (auto it = state.samples.rbegin(); it != state.samples.rend() && it->t >= lo; ++it)
  {
    if (it->t > state.now)
      continue;
    sum += it->value;
    ++result.window_count;
  }
  if (result.window_count == 0)
    throw NoRecentSamples("no target samples in the validation window");
  result.window_mean = sum / static_cast<double>(result.window_count);

  bool refit = true;
  if (state.model)
  {
    result.prediction = state.model->predict(state.position);
    refit = std::abs(result.window_mean - result.prediction) > cfg.error_threshold;
  }
  if (!refit)
    return result;

  result.decision = Decision::Refit;
  TrainingSet all;
  all.rows.reserve(state.samples.size());
  for (const auto &s : state.samples)
    all.rows.push_back(TrainingRow{s.position, s.value});
  const TrainingSet train = subsample(all, cfg.training_cap, state.rng);
  try
  {
    state.model = fit_model(params, train, state.position, state.rng);
    state.refits.push_back(RefitEvent{state.n, state.now, state.position, result.window_mean, result.prediction});
  }
  catch (const FitError &)
  {
    result.fit_failed = true;
  }
  return result;
}

// ------------------------------------------------------------------ actions

Position model_argmax(const ForwardModel &model, const SearchLattice &lattice, Position current)
{
  const auto &pts = lattice.points();
  if (pts.empty())
    return current;
  Position best = pts.front();
  double best_v = model.predict(best);
  double best_d = distance(best, current);
  for (std::size_t k = 1; k < pts.size(); ++k)
  {
    const Position p = pts[k];
    const double v = model.predict(p);
    if (v < best_v)
      continue;
    const double d = distance(p, current);
    if (v == best_v)
    {
      if (d > best_d)
        continue;
      if (d == best_d && (p.x > best.x || (p.x == best.x && p.y >= best.y)))
        continue;
    }
    best = p;
    best_v = v;
    best_d = d;
  }
  return best;
}

WaypointChoice greedy_waypoint(SeekerState &state, const SeekerConfig &cfg, const World &world,
                               const SearchLattice &lattice)
{
  auto fallback = [&] {
    WaypointChoice c = novelty_waypoint(state, cfg, world, lattice);
    c.fallback = true;
    return c;
  };
  if (!state.model || lattice.points().empty())
    return fallback();

  const Position here = state.position;
  const Position goal = model_argmax(*state.model, lattice, here);
  const double d = distance(here, goal);
  if (d <= cfg.step_width)
    return {goal};
  const Position step = here + (cfg.step_width / d) * (goal - here);
  if (is_legal(world, step))
    return {step};
  if (auto p = first_valid_on_segment(world.grid, world.footprint, here, goal, cfg.step_width,
                                      cfg.line_search_increment))
    return {*p};
  return fallback();
}

namespace
{

double distance_to_trajectory(Position p, const std::vector<TimedPosition> &traj)
{
  if (traj.size() == 1)
    return distance(p, traj.front().position);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.size(); ++i)
    best = std::min(best, distance_to_segment(p, traj[i - 1].position, traj[i].position));
  return best;
}

} // namespace

std::vector<NoveltyCandidate> novelty_candidates(const SeekerState &state, const SeekerConfig &cfg,
                                                 const SearchLattice &lattice, bool &relaxed)
{
  const Position here = state.position;
  const double cutoff = cfg.novelty_cutoff_factor * cfg.step_width;
  std::vector<NoveltyCandidate> out;
  relaxed = false;
  for (const Position &p : lattice.points())
  {
    const double d = distance(p, here);
    if (d > cutoff)
      continue;
    if (distance_to_trajectory(p, state.trajectory) <= cfg.novelty_min_dist)
      continue;
    out.push_back({p, std::exp(-d)});
  }
  if (!out.empty())
    return out;

  relaxed = true;
  for (const Position &p : lattice.points())
  {
    const double d = distance(p, here);
    if (d > 0.0 && d <= cutoff)
      out.push_back({p, std::exp(-d)});
  }
  if (!out.empty())
    return out;
  for (const Position &p : lattice.points())
  {
    const double d = distance(p, here);
    if (d > 0.0)
      out.push_back({p, std::exp(-d)});
  }
  return out;
}

WaypointChoice novelty_waypoint(SeekerState &state, const SeekerConfig &cfg, const World &, const SearchLattice &lattice)
{
  WaypointChoice choice{state.position};
  const auto cands = novelty_candidates(state, cfg, lattice, choice.relaxed);
  if (cands.empty())
    return choice;
  std::vector<double> w(cands.size());
  std::transform(cands.begin(), cands.end(), w.begin(), [](const NoveltyCandidate &c) { return c.weight; });
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  choice.position = cands[pick(state.rng)].position;
  return choice;
}

WaypointChoice gradient_baseline_step(SeekerState &state, const SeekerConfig &cfg, const World &world)
{
  const Position here = state.position;
  const double far = cfg.novelty_cutoff_factor * cfg.step_width;
  auto project = [&](Position dir) -> std::optional<Position> {
    const Position step = here + cfg.step_width * dir;
    if (is_legal(world, step))
      return step;
    return first_valid_on_segment(world.grid, world.footprint, here, here + far * dir, cfg.step_width,
                                  cfg.line_search_increment);
  };
  auto random_step = [&] {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int attempt = 0; attempt < 20; ++attempt)
    {
      const double a = angle(state.rng);
      if (auto p = project(Position{std::cos(a), std::sin(a)}))
        return WaypointChoice{*p, true};
    }
    return WaypointChoice{here, true};
  };

  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  std::size_t used = 0;
  const double r2 = cfg.gradient_radius * cfg.gradient_radius;
  for (const auto &s : state.samples)
  {
    const Position d = s.position - here;
    if (dot(d, d) > r2)
      continue;
    const Eigen::Vector3d f(1.0, d.x, d.y);
    gram.noalias() += f * f.transpose();
    rhs.noalias() += s.value * f;
    ++used;
  }
  if (used < 3)
    return random_step();

  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod;
  cod.setThreshold(1e-10);
  cod.compute(gram);
  if (cod.rank() < 2)
    return random_step();
  const Eigen::Vector3d w = cod.solve(rhs);
  const Position grad{w(1), w(2)};
  const double g = norm(grad);
  if (!(g > 0.0) || !std::isfinite(g))
    return random_step();
  if (auto p = project((1.0 / g) * grad))
    return {*p};
  return random_step();
}

// ------------------------------------------------------------------ episode

int TrajectoryLog::loop_iterations() const
{
  return static_cast<int>(std::count_if(iterations.begin(), iterations.end(),
                                        [](const IterationRecord &r) { return r.action != ActionKind::Initial; }));
}

namespace
{

class Episode
{
public:
  Episode(const World &world, const SearchLattice &lattice, const EpisodeSetup &setup, std::uint64_t seed)
      : world_(world), lattice_(lattice), setup_(setup), cfg_(setup.config), state_(seed, setup.start)
  {
    log_.seed = seed;
    log_.strategy = setup.strategy;
    log_.config = setup.config;
    log_.model = setup.model;
    log_.target = setup.target;
    log_.start = setup.start;
  }

  TrajectoryLog run()
  {
    if (initial_move())
    {
      for (int n = 0; n < cfg_.max_iterations; ++n)
      {
        state_.n = n;
        if (!iterate(n))
          break;
        if (cfg_.stop_radius && setup_.optimum && distance(state_.position, *setup_.optimum) <= *cfg_.stop_radius)
          break;
      }
    }
    log_.refits = state_.refits;
    log_.samples = std::move(state_.samples);
    log_.final_position = state_.position;
    log_.end_time = state_.now;
    return std::move(log_);
  }

private:
  void collect(Position from, Position to, double duration)
  {
    const auto packets = stream_over(setup_.env.propagation, setup_.env.nodes, from, to, duration, state_.now,
                                     state_.rng, &world_.grid);
    const auto targets = to_target_samples(setup_.target, packets);
    state_.samples.insert(state_.samples.end(), targets.begin(), targets.end());
    state_.now += duration;
  }

  void drive(const std::vector<Position> &path)
  {
    for (std::size_t i = 1; i < path.size(); ++i)
    {
      const double len = distance(path[i - 1], path[i]);
      collect(path[i - 1], path[i], len / cfg_.speed);
      state_.trajectory.push_back(TimedPosition{state_.now, path[i]});
      log_.path_length += len;
    }
    state_.position = path.back();
    collect(state_.position, state_.position, cfg_.dwell_time);
  }

  std::optional<std::vector<Position>> plan(Position to) const
  {
    return plan_path(world_.grid, world_.footprint, state_.position, to);
  }

  bool initial_move()
  {
    const double range = cfg_.initial_step_factor * cfg_.step_width;
    std::vector<Position> cands;
    for (const Position &p : lattice_.points())
    {
      const double d = distance(p, state_.position);
      if (d > 0.0 && d <= range)
        cands.push_back(p);
    }
    IterationRecord rec;
    rec.t = state_.now;
    rec.action = ActionKind::Initial;
    rec.waypoint = state_.position;
    std::optional<std::vector<Position>> path;
    for (int attempt = 0; attempt < cfg_.max_replans && !cands.empty() && !path; ++attempt)
    {
      std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
      rec.waypoint = cands[pick(state_.rng)];
      path = plan(rec.waypoint);
    }
    if (!path)
    {
      if (!cands.empty())
        return abort("initial move: no reachable waypoint after " + std::to_string(cfg_.max_replans) + " attempts");
      path = std::vector<Position>{state_.position};
      rec.waypoint = state_.position;
    }
    drive(*path);
    rec.path = std::move(*path);
    log_.iterations.push_back(std::move(rec));
    return true;
  }

  bool iterate(int n)
  {
    IterationRecord rec;
    rec.n = n;

    if (setup_.strategy == Strategy::InternalModel)
    {
      const ValidationResult v = validate_with_retry();
      rec.refit = v.decision == Decision::Refit;
      rec.fit_failed = v.fit_failed;
      rec.window_mean = v.window_mean;
      rec.prediction = v.prediction;
    }
    rec.t = state_.now;

    WaypointChoice choice{state_.position};
    if (setup_.strategy == Strategy::InternalModel)
    {
      rec.epsilon = epsilon(n, cfg_);
      rec.draw = std::uniform_real_distribution<double>(0.0, 1.0)(state_.rng);
      const bool greedy = rec.draw > rec.epsilon && state_.model && !rec.fit_failed;
      rec.action = greedy ? ActionKind::Greedy : ActionKind::Epsilon;
      choice = greedy ? greedy_waypoint(state_, cfg_, world_, lattice_)
                      : novelty_waypoint(state_, cfg_, world_, lattice_);
    }
    else
    {
      rec.action = ActionKind::Gradient;
      choice = gradient_baseline_step(state_, cfg_, world_);
    }
    rec.fallback = choice.fallback;

    auto path = plan(choice.position);
    for (int attempt = 0; !path && attempt < cfg_.max_replans; ++attempt)
    {
      choice = novelty_waypoint(state_, cfg_, world_, lattice_);
      rec.fallback = true;
      path = plan(choice.position);
    }
    rec.waypoint = choice.position;
    if (!path)
      return abort("iteration " + std::to_string(n) + ": no path after " + std::to_string(cfg_.max_replans) +
                   " novelty redraws");
    drive(*path);
    rec.path = std::move(*path);
    log_.iterations.push_back(std::move(rec));
    return true;
  }

  ValidationResult validate_with_retry()
  {
    for (int attempt = 0; attempt < 3; ++attempt)
    {
      try
      {
        return validate_and_maybe_refit(state_, cfg_, setup_.model);
      }
      catch (const NoRecentSamples &)
      {
        collect(state_.position, state_.position, cfg_.validation_window);
      }
    }
    ValidationResult none;
    none.window_mean = std::nan("");
    if (state_.model)
      none.prediction = state_.model->predict(state_.position);
    return none;
  }

  bool abort(std::string reason)
  {
    log_.aborted = true;
    log_.abort_reason = std::move(reason);
    return false;
  }

  const World &world_;
  const SearchLattice &lattice_;
  const EpisodeSetup &setup_;
  const SeekerConfig &cfg_;
  SeekerState state_;
  TrajectoryLog log_;
};

} // namespace

TrajectoryLog run_episode(const World &world, const SearchLattice &lattice, const EpisodeSetup &setup,
                          std::uint64_t seed)
{
  setup.config.validate();
  setup.env.propagation.validate();
  setup.target.validate(setup.env.nodes);
  if (setup.env.nodes.empty())
    throw std::invalid_argument("episode needs at least one transmitter");
  if (!is_legal(world, setup.start))
    throw std::invalid_argument("episode start position is not legal");
  return Episode(world, lattice, setup, seed).run();
}

TrajectoryLog run_episode(const World &world, const EpisodeSetup &setup, std::uint64_t seed)
{
  const SearchLattice lattice(world, setup.config.greedy_grid_resolution, setup.start);
  return run_episode(world, lattice, setup, seed);
}

} // namespace imseek
