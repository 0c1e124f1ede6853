#ifndef IMSEEK_TEST_ORACLES_HPP_
#define IMSEEK_TEST_ORACLES_HPP_

#include "imseek/models.hpp"

#include <array>
#include <cmath>

namespace imseek::test
{

// Ridge oracle: normal equations accumulated directly and solved by
// Cramer's rule on the 3x3 system.
inline std::array<double, 3> ridge_oracle(const TrainingSet &s, Position center, double radius, double alpha)
{
  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double b[3] = {0, 0, 0};
  for (const auto &r : s.rows)
  {
    const double dx = r.position.x - center.x;
    const double dy = r.position.y - center.y;
    if (std::sqrt(dx * dx + dy * dy) > radius)
      continue;
    const double f[3] = {1.0, r.position.x, r.position.y};
    for (int i = 0; i < 3; ++i)
    {
      b[i] += f[i] * r.value;
      for (int j = 0; j < 3; ++j)
        a[i][j] += f[i] * f[j];
    }
  }
  for (int i = 0; i < 3; ++i)
    a[i][i] += alpha;
  auto det = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det(a);
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k)
  {
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m[i][j] = j == k ? b[i] : a[i][j];
    w[static_cast<std::size_t>(k)] = det(m) / d;
  }
  return w;
}

} // namespace imseek::test

#endif // IMSEEK_TEST_ORACLES_HPP_
