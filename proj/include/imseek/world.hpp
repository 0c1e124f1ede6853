#ifndef IMSEEK_WORLD_HPP_
#define IMSEEK_WORLD_HPP_

#include "imseek/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace imseek
{

class MapError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Cell
{
  int x{0};
  int y{0};

  friend bool operator==(const Cell &, const Cell &) = default;
};

/**
 * Free/occupied raster. Cell (0, 0) is the lower-left cell; its lower-left
 * corner sits at origin. Rows are stored bottom-up, row-major.
 */
class OccupancyGrid
{
public:
  OccupancyGrid(double resolution, int width, int height, Position origin, std::vector<bool> free_cells);

  /// Reads the text map format: a `resolution <m> origin <x> <y>` header
  /// followed by rows of '.' (free) and '#' (occupied), top row first.
  static OccupancyGrid parse(std::istream &in);
  static OccupancyGrid load(const std::filesystem::path &path);

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Position origin() const { return origin_; }
  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }

  bool contains(Position p) const;
  std::optional<Cell> cell_of(Position p) const;
  bool in_range(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  /// Out-of-range cells count as occupied.
  bool is_free(Cell c) const;
  Position cell_center(Cell c) const;
  int index(Cell c) const { return c.y * width_ + c.x; }

  void write(std::ostream &out) const;

private:
  double resolution_;
  int width_;
  int height_;
  Position origin_;
  std::vector<bool> free_;
};

struct RobotFootprint
{
  double radius{0.35};
};

/// Map plus the robot clearance used for every legality query.
struct World
{
  World(OccupancyGrid g, RobotFootprint fp);

  OccupancyGrid grid;
  RobotFootprint footprint;
};

bool is_legal(const OccupancyGrid &grid, const RobotFootprint &fp, Position p);

/// Samples the segment at resolution/2 (endpoints included).
bool is_segment_legal(const OccupancyGrid &grid, const RobotFootprint &fp, Position a, Position b);

/// 8-connected A* over cells with Euclidean edge costs, followed by
/// waypoint pruning. Returns std::nullopt when `to` is unreachable.
std::optional<std::vector<Position>> plan_path(const OccupancyGrid &grid, const RobotFootprint &fp, Position from,
                                               Position to);

/// Scans the segment from `from` toward `toward` at start_offset,
/// start_offset + increment, ... and finally at `toward` itself.
std::optional<Position> first_valid_on_segment(const OccupancyGrid &grid, const RobotFootprint &fp, Position from,
                                               Position toward, double start_offset, double increment);

double path_length(const std::vector<Position> &path);

inline bool is_legal(const World &w, Position p) { return is_legal(w.grid, w.footprint, p); }

} // namespace imseek

#endif // IMSEEK_WORLD_HPP_
