#ifndef IMSEEK_GEOMETRY_HPP_
#define IMSEEK_GEOMETRY_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace imseek
{

/// Planar position in meters, map frame.
struct Position
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Position &, const Position &) = default;
};

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }
inline Position operator*(double s, Position p) { return {s * p.x, s * p.y}; }

inline double norm(Position p) { return std::hypot(p.x, p.y); }
inline double distance(Position a, Position b) { return norm(a - b); }
inline double dot(Position a, Position b) { return a.x * b.x + a.y * b.y; }

inline Position lerp(Position a, Position b, double t) { return a + t * (b - a); }

inline double distance_to_segment(Position p, Position a, Position b)
{
  const Position ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0)
    return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + t * ab);
}

/// Position stamped with simulation time (seconds).
struct TimedPosition
{
  double t{0.0};
  Position position;
};

/// Every stochastic decision of an episode draws from one of these.
using Rng = std::mt19937_64;

} // namespace imseek

#endif // IMSEEK_GEOMETRY_HPP_
