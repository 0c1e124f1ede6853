#include "imseek/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

namespace imseek
{

OccupancyGrid::OccupancyGrid(double resolution, int width, int height, Position origin, std::vector<bool> free_cells)
    : resolution_(resolution), width_(width), height_(height), origin_(origin), free_(std::move(free_cells))
{
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_))
    throw MapError("map resolution must be positive");
  if (width_ < 1 || height_ < 1)
    throw MapError("map must have at least one row and one column");
  if (!std::isfinite(origin_.x) || !std::isfinite(origin_.y))
    throw MapError("map origin must be finite");
  if (free_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
    throw MapError("cell count does not match width * height");
  if (std::none_of(free_.begin(), free_.end(), [](bool f) { return f; }))
    throw MapError("map has no free cell");
}

OccupancyGrid OccupancyGrid::parse(std::istream &in)
{
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line))
    throw MapError("map: empty input");
  ++lineno;

  std::istringstream header(line);
  std::string kw_res, kw_origin;
  double resolution = 0.0;
  Position origin;
  if (!(header >> kw_res >> resolution >> kw_origin >> origin.x >> origin.y) || kw_res != "resolution" ||
      kw_origin != "origin")
    throw MapError("map line 1: expected 'resolution <meters> origin <x> <y>'");

  std::vector<std::string> rows;
  while (std::getline(in, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    for (char c : line)
    {
      if (c != '.' && c != '#')
        throw MapError("map line " + std::to_string(lineno) + ": unexpected character '" + std::string(1, c) + "'");
    }
    if (!rows.empty() && line.size() != rows.front().size())
      throw MapError("map line " + std::to_string(lineno) + ": row length " + std::to_string(line.size()) +
                     " differs from " + std::to_string(rows.front().size()));
    rows.push_back(line);
  }
  if (rows.empty())
    throw MapError("map: no grid rows");

  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<bool> cells(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
  {
    const int y = height - 1 - r; // first text row is the top
    for (int x = 0; x < width; ++x)
      cells[static_cast<std::size_t>(y) * width + x] = rows[r][x] == '.';
  }
  return OccupancyGrid(resolution, width, height, origin, std::move(cells));
}

OccupancyGrid OccupancyGrid::load(const std::filesystem::path &path)
{
  std::ifstream f(path);
  if (!f)
    throw MapError("cannot open map file '" + path.string() + "'");
  return parse(f);
}

void OccupancyGrid::write(std::ostream &out) const
{
  out.precision(17);
  out << "resolution " << resolution_ << " origin " << origin_.x << " " << origin_.y << "\n";
  for (int y = height_ - 1; y >= 0; --y)
  {
    for (int x = 0; x < width_; ++x)
      out << (free_[static_cast<std::size_t>(y) * width_ + x] ? '.' : '#');
    out << "\n";
  }
}

bool OccupancyGrid::contains(Position p) const
{
  return p.x >= origin_.x && p.y >= origin_.y && p.x < origin_.x + extent_x() && p.y < origin_.y + extent_y();
}

std::optional<Cell> OccupancyGrid::cell_of(Position p) const
{
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !contains(p))
    return std::nullopt;
  Cell c{static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
         static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
  // guard the upper edge against rounding
  c.x = std::min(c.x, width_ - 1);
  c.y = std::min(c.y, height_ - 1);
  return c;
}

bool OccupancyGrid::is_free(Cell c) const
{
  return in_range(c) && free_[static_cast<std::size_t>(index(c))];
}

Position OccupancyGrid::cell_center(Cell c) const
{
  return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

World::World(OccupancyGrid g, RobotFootprint fp) : grid(std::move(g)), footprint(fp)
{
  if (!(footprint.radius > 0.0))
    throw MapError("footprint radius must be positive");
  if (!(footprint.radius < 0.5 * std::min(grid.extent_x(), grid.extent_y())))
    throw MapError("footprint radius must be below half the map's smaller extent");
}

bool is_legal(const OccupancyGrid &grid, const RobotFootprint &fp, Position p)
{
  const auto home = grid.cell_of(p);
  if (!home || !grid.is_free(*home))
    return false;

  const double res = grid.resolution();
  const Position o = grid.origin();
  const double r = fp.radius;
  const int x0 = static_cast<int>(std::floor((p.x - r - o.x) / res));
  const int x1 = static_cast<int>(std::floor((p.x + r - o.x) / res));
  const int y0 = static_cast<int>(std::floor((p.y - r - o.y) / res));
  const int y1 = static_cast<int>(std::floor((p.y + r - o.y) / res));
  for (int cy = y0; cy <= y1; ++cy)
  {
    for (int cx = x0; cx <= x1; ++cx)
    {
      const Cell c{cx, cy};
      if (grid.is_free(c))
        continue;
      // closest point of the cell rectangle to p
      const double lx = o.x + cx * res;
      const double ly = o.y + cy * res;
      const double qx = std::clamp(p.x, lx, lx + res);
      const double qy = std::clamp(p.y, ly, ly + res);
      const double dx = p.x - qx;
      const double dy = p.y - qy;
      if (dx * dx + dy * dy < r * r)
        return false;
    }
  }
  return true;
}

bool is_segment_legal(const OccupancyGrid &grid, const RobotFootprint &fp, Position a, Position b)
{
  const double len = distance(a, b);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * grid.resolution()))));
  for (int k = 0; k <= steps; ++k)
  {
    if (!is_legal(grid, fp, lerp(a, b, static_cast<double>(k) / steps)))
      return false;
  }
  return true;
}

namespace
{

std::vector<Position> prune_waypoints(const OccupancyGrid &grid, const RobotFootprint &fp,
                                      const std::vector<Position> &raw)
{
  if (raw.size() <= 2)
    return raw;
  std::vector<Position> out{raw.front()};
  for (std::size_t k = 1; k + 1 < raw.size(); ++k)
  {
    if (!is_segment_legal(grid, fp, out.back(), raw[k + 1]))
      out.push_back(raw[k]);
  }
  out.push_back(raw.back());
  return out;
}

} // namespace

std::optional<std::vector<Position>> plan_path(const OccupancyGrid &grid, const RobotFootprint &fp, Position from,
                                               Position to)
{
  if (from == to)
  {
    if (!is_legal(grid, fp, from))
      return std::nullopt;
    return std::vector<Position>{from};
  }
  if (!is_legal(grid, fp, from) || !is_legal(grid, fp, to))
    return std::nullopt;

  const Cell start = *grid.cell_of(from);
  const Cell goal = *grid.cell_of(to);
  if (start == goal && is_segment_legal(grid, fp, from, to))
    return std::vector<Position>{from, to};

  const int n = grid.width() * grid.height();
  const int start_idx = grid.index(start);
  const int goal_idx = grid.index(goal);

  auto node_pos = [&](int idx) {
    if (idx == start_idx)
      return from;
    if (idx == goal_idx)
      return to;
    return grid.cell_center(Cell{idx % grid.width(), idx / grid.width()});
  };

  std::vector<signed char> legal(static_cast<std::size_t>(n), -1);
  auto traversable = [&](int idx) {
    auto &s = legal[static_cast<std::size_t>(idx)];
    if (s < 0)
      s = is_legal(grid, fp, node_pos(idx)) ? 1 : 0;
    return s == 1;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(static_cast<std::size_t>(n), inf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<bool> closed(static_cast<std::size_t>(n), false);

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[static_cast<std::size_t>(start_idx)] = 0.0;
  open.emplace(distance(from, to), start_idx);

  static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  bool found = false;
  while (!open.empty())
  {
    const int cur = open.top().second;
    open.pop();
    if (closed[static_cast<std::size_t>(cur)])
      continue;
    closed[static_cast<std::size_t>(cur)] = true;
    if (cur == goal_idx)
    {
      found = true;
      break;
    }
    const Cell c{cur % grid.width(), cur / grid.width()};
    const Position cp = node_pos(cur);
    for (int k = 0; k < 8; ++k)
    {
      const Cell nc{c.x + dx[k], c.y + dy[k]};
      if (!grid.in_range(nc))
        continue;
      const int nidx = grid.index(nc);
      if (closed[static_cast<std::size_t>(nidx)] || !traversable(nidx))
        continue;
      const Position np = node_pos(nidx);
      const double g = cost[static_cast<std::size_t>(cur)] + distance(cp, np);
      if (g >= cost[static_cast<std::size_t>(nidx)])
        continue;
      if (!is_segment_legal(grid, fp, cp, np))
        continue;
      cost[static_cast<std::size_t>(nidx)] = g;
      parent[static_cast<std::size_t>(nidx)] = cur;
      open.emplace(g + distance(np, to), nidx);
    }
  }
  if (!found)
    return std::nullopt;

  std::vector<Position> raw;
  for (int idx = goal_idx; idx != -1; idx = parent[static_cast<std::size_t>(idx)])
    raw.push_back(node_pos(idx));
  std::reverse(raw.begin(), raw.end());
  return prune_waypoints(grid, fp, raw);
}

std::optional<Position> first_valid_on_segment(const OccupancyGrid &grid, const RobotFootprint &fp, Position from,
                                               Position toward, double start_offset, double increment)
{
  if (!(start_offset >= 0.0) || !(increment > 0.0))
    throw std::invalid_argument("first_valid_on_segment: need start_offset >= 0 and increment > 0");
  const double len = distance(from, toward);
  if (len > 0.0)
  {
    const Position dir = (1.0 / len) * (toward - from);
    for (int k = 0;; ++k)
    {
      const double d = start_offset + k * increment;
      if (d >= len)
        break;
      const Position p = from + d * dir;
      if (is_legal(grid, fp, p))
        return p;
    }
  }
  if (is_legal(grid, fp, toward))
    return toward;
  return std::nullopt;
}

double path_length(const std::vector<Position> &path)
{
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    total += distance(path[i - 1], path[i]);
  return total;
}

} // namespace imseek
