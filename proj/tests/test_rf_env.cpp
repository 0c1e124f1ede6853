#include "imseek/rf_env.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace imseek;

namespace
{

PropagationConfig quiet()
{
  PropagationConfig c;
  c.shadowing_sigma_db = 0.0;
  return c;
}

TransmitterNode node_at(Position p, int id = 1)
{
  TransmitterNode n;
  n.id = id;
  n.position = p;
  return n;
}

struct Moments
{
  double mean;
  double std;
};

Moments moments(const std::vector<double> &v)
{
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

} // namespace

TEST_CASE("mean_rssi analytic values")
{
  auto cfg = quiet();
  const auto n = node_at({5.0, 5.0});
  CHECK(mean_rssi(cfg, n, {6.0, 5.0}) == -40.0);
  CHECK(mean_rssi(cfg, n, {5.3, 5.2}) == -40.0); // inside the reference distance
  cfg.path_loss_exponent = 2.0;
  CHECK(mean_rssi(cfg, n, {15.0, 5.0}) == doctest::Approx(-60.0).epsilon(1e-14));
  cfg.path_loss_exponent = 2.5;
  CHECK(mean_rssi(cfg, n, {5.0, 15.0}) == doctest::Approx(-65.0).epsilon(1e-14));
}

TEST_CASE("mean_rssi is radially symmetric and non-increasing without fading")
{
  const auto cfg = quiet();
  const auto n = node_at({2.0, 3.0});
  CHECK(mean_rssi(cfg, n, {5.0, 7.0}) == doctest::Approx(mean_rssi(cfg, n, {-3.0, 3.0})));
  for (double angle : {0.0, 1.0, 2.5, 4.0})
  {
    double prev = mean_rssi(cfg, n, n.position);
    for (double d = 0.05; d < 20.0; d += 0.05)
    {
      const double v = mean_rssi(cfg, n, {n.position.x + d * std::cos(angle), n.position.y + d * std::sin(angle)});
      REQUIRE(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("sample_rssi without shadowing equals the mean")
{
  const auto cfg = quiet();
  const auto n = node_at({0.0, 0.0});
  Rng rng(3);
  for (int i = 0; i < 50; ++i)
  {
    const Position p{0.3 * i, 0.1 * i};
    CHECK(sample_rssi(cfg, n, p, rng) == mean_rssi(cfg, n, p));
  }
}

TEST_CASE("shadowing noise has the configured standard deviation")
{
  PropagationConfig cfg;
  const auto n = node_at({0.0, 0.0});
  const Position p{4.0, 3.0};
  Rng rng(2024);
  std::vector<double> v(10000);
  for (auto &x : v)
    x = sample_rssi(cfg, n, p, rng);
  const auto m = moments(v);
  CHECK(m.std >= 3.86);
  CHECK(m.std <= 4.14);
  CHECK(std::abs(m.mean - mean_rssi(cfg, n, p)) <= 0.15);
}

TEST_CASE("stream_over a stationary second yields a Poisson packet count")
{
  const auto cfg = quiet();
  const std::vector<TransmitterNode> nodes{node_at({0.0, 0.0})};
  Rng rng(5);
  const Position p{2.0, 1.0};
  const auto s = stream_over(cfg, nodes, p, p, 1.0, 10.0, rng);
  CHECK(s.size() >= 158);
  CHECK(s.size() <= 242);
  for (const auto &x : s)
  {
    CHECK(x.position == p);
    CHECK(x.t >= 10.0);
    CHECK(x.t < 11.0);
  }

  // the rate itself, over many seconds
  double total = 0.0;
  for (int k = 0; k < 200; ++k)
    total += static_cast<double>(stream_over(cfg, nodes, p, p, 1.0, 0.0, rng).size());
  CHECK(total / 200.0 == doctest::Approx(200.0).epsilon(0.015));
}

TEST_CASE("stream_along edge cases")
{
  const auto cfg = quiet();
  const std::vector<TransmitterNode> nodes{node_at({0.0, 0.0})};
  Rng rng(1);
  CHECK(stream_along(cfg, nodes, {1.0, 1.0}, {1.0, 1.0}, 0.3, 0.0, rng).empty());
  CHECK(stream_over(cfg, nodes, {1.0, 1.0}, {2.0, 1.0}, 0.0, 0.0, rng).empty());
  CHECK_THROWS_AS(stream_along(cfg, nodes, {1.0, 1.0}, {2.0, 1.0}, 0.0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("two nodes merge into one time-sorted stream with interpolated positions")
{
  PropagationConfig cfg;
  const std::vector<TransmitterNode> nodes{node_at({0.0, 0.0}, 1), node_at({10.0, 0.0}, 2)};
  Rng rng(9);
  const Position a{1.0, 1.0};
  const Position b{4.0, 5.0}; // 5 m
  const double t0 = 3.0;
  const auto s = stream_along(cfg, nodes, a, b, 0.5, t0, rng);
  std::set<int> ids;
  for (std::size_t i = 0; i < s.size(); ++i)
  {
    ids.insert(s[i].node_id);
    if (i > 0)
      CHECK(s[i - 1].t <= s[i].t);
    const double frac = (s[i].t - t0) / 10.0;
    CHECK(s[i].position.x == doctest::Approx(a.x + frac * (b.x - a.x)));
    CHECK(s[i].position.y == doctest::Approx(a.y + frac * (b.y - a.y)));
    CHECK(std::isfinite(s[i].rssi));
  }
  CHECK(ids == std::set<int>{1, 2});
  CHECK(s.size() > 3000);
  CHECK(s.size() < 5000);
}

TEST_CASE("streams are reproducible from the seed")
{
  PropagationConfig cfg;
  cfg.fading.enabled = true;
  const std::vector<TransmitterNode> nodes{node_at({0.0, 0.0}, 1), node_at({3.0, 4.0}, 2)};
  Rng r1(77);
  Rng r2(77);
  const auto s1 = stream_along(cfg, nodes, {1, 1}, {2, 3}, 0.3, 0.0, r1);
  const auto s2 = stream_along(cfg, nodes, {1, 1}, {2, 3}, 0.3, 0.0, r2);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i)
  {
    CHECK(s1[i].t == s2[i].t);
    CHECK(s1[i].rssi == s2[i].rssi);
    CHECK(s1[i].node_id == s2[i].node_id);
  }
}

TEST_CASE("frozen fading is a persistent, seeded field")
{
  PropagationConfig cfg;
  CHECK(frozen_fading(cfg, 1, {1.3, 2.7}) == 0.0);
  cfg.fading.enabled = true;
  cfg.seed = 42;
  const Position p{1.337, 2.71};
  const double v = frozen_fading(cfg, 1, p);
  CHECK(frozen_fading(cfg, 1, p) == v);
  CHECK(frozen_fading(cfg, 2, p) != v);
  auto other = cfg;
  other.seed = 43;
  CHECK(frozen_fading(other, 1, p) != v);

  // lattice values are N(0, amplitude²); nearby points are correlated
  std::vector<double> lattice;
  double near_diff = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j)
    {
      const Position q{i * cfg.fading.correlation_length, j * cfg.fading.correlation_length};
      lattice.push_back(frozen_fading(cfg, 1, q));
      near_diff += std::abs(frozen_fading(cfg, 1, q + Position{0.01, 0.0}) - lattice.back());
    }
  const auto m = moments(lattice);
  CHECK(std::abs(m.mean) < 0.2);
  CHECK(m.std == doctest::Approx(cfg.fading.amplitude_db).epsilon(0.05));
  CHECK(near_diff / 10000.0 < 0.15 * m.std);
}

TEST_CASE("averaging over bins wider than the fading scale recovers pure path loss")
{
  PropagationConfig cfg;
  cfg.shadowing_sigma_db = 0.0;
  cfg.fading.enabled = true;
  const auto n = node_at({0.0, 0.0});
  auto pure = cfg;
  pure.fading.enabled = false;
  // 2 m bin sampled at 0.05 m
  double sum = 0.0;
  int count = 0;
  for (double x = 10.0; x < 12.0; x += 0.05)
    for (double y = 0.0; y < 2.0; y += 0.05)
    {
      sum += mean_rssi(cfg, n, {x, y}) - mean_rssi(pure, n, {x, y});
      ++count;
    }
  CHECK(std::abs(sum / count) < 1.0);
}

TEST_CASE("field bumps and wall attenuation")
{
  auto cfg = quiet();
  const auto n = node_at({0.5, 0.5});
  const double base = mean_rssi(cfg, n, {4.0, 0.5});
  cfg.bumps.push_back(FieldBump{{4.0, 0.5}, 6.0, 1.0});
  CHECK(mean_rssi(cfg, n, {4.0, 0.5}) == doctest::Approx(base + 6.0));
  CHECK(mean_rssi(cfg, n, {4.0, 1.5}) - mean_rssi(quiet(), n, {4.0, 1.5}) ==
        doctest::Approx(6.0 * std::exp(-0.5)));

  const auto g = imseek::test::grid_from_rows({"....#...#...", "....#...#..."}, 0.5);
  CHECK(walls_crossed(g, {0.5, 0.5}, {5.5, 0.5}) == 2);
  CHECK(walls_crossed(g, {0.5, 0.5}, {1.5, 0.5}) == 0);
  auto att = quiet();
  att.wall_attenuation_db = 3.0;
  CHECK(mean_rssi(att, n, {5.5, 0.5}, &g) == doctest::Approx(mean_rssi(att, n, {5.5, 0.5}) - 6.0));
}

TEST_CASE("propagation config validation")
{
  PropagationConfig c;
  CHECK_NOTHROW(c.validate());
  c.shadowing_sigma_db = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PropagationConfig{};
  c.path_loss_exponent = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PropagationConfig{};
  c.bumps.push_back(FieldBump{{0, 0}, 6.0, 0.0});
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  RfEnvironment env;
  env.nodes = {node_at({0, 0}, 3)};
  CHECK(env.node(3).id == 3);
  CHECK_THROWS_AS(env.node(4), std::out_of_range);
}
