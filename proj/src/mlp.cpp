#include "imseek/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace imseek
{

namespace
{

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Standardization fit_standardization(const std::vector<double> &v)
{
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  return {mean, sd > 0.0 && std::isfinite(sd) ? sd : 1.0};
}

bool has_spread(const std::vector<double> &v)
{
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end();
}

} // namespace

Mlp::Mlp(int inputs, int hidden)
    : inputs_(inputs), hidden_(hidden), params_(static_cast<std::size_t>(hidden * inputs + 2 * hidden + 1), 0.0),
      activation_(static_cast<std::size_t>(hidden), 0.0)
{
  if (inputs < 1 || hidden < 1)
    throw std::invalid_argument("mlp: need at least one input and one hidden unit");
}

void Mlp::randomize(double range, Rng &rng)
{
  std::uniform_real_distribution<double> u(-range, range);
  for (double &p : params_)
    p = u(rng);
}

double Mlp::forward(std::span<const double> input) const
{
  const double *w1 = params_.data() + hidden_weight_offset();
  const double *b1 = params_.data() + hidden_bias_offset();
  const double *w2 = params_.data() + output_weight_offset();
  double out = params_[output_bias_offset()];
  for (int h = 0; h < hidden_; ++h)
  {
    double z = b1[h];
    for (int i = 0; i < inputs_; ++i)
      z += w1[h * inputs_ + i] * input[static_cast<std::size_t>(i)];
    out += w2[h] * sigmoid(z);
  }
  return out;
}

double Mlp::loss_gradient(std::span<const double> input, double target, std::span<double> grad) const
{
  const double *w1 = params_.data() + hidden_weight_offset();
  const double *b1 = params_.data() + hidden_bias_offset();
  const double *w2 = params_.data() + output_weight_offset();
  double out = params_[output_bias_offset()];
  for (int h = 0; h < hidden_; ++h)
  {
    double z = b1[h];
    for (int i = 0; i < inputs_; ++i)
      z += w1[h * inputs_ + i] * input[static_cast<std::size_t>(i)];
    activation_[static_cast<std::size_t>(h)] = sigmoid(z);
    out += w2[h] * activation_[static_cast<std::size_t>(h)];
  }

  const double err = out - target;
  double *g_w1 = grad.data() + hidden_weight_offset();
  double *g_b1 = grad.data() + hidden_bias_offset();
  double *g_w2 = grad.data() + output_weight_offset();
  grad[output_bias_offset()] = err;
  for (int h = 0; h < hidden_; ++h)
  {
    const double a = activation_[static_cast<std::size_t>(h)];
    g_w2[h] = err * a;
    const double delta = err * w2[h] * a * (1.0 - a);
    g_b1[h] = delta;
    for (int i = 0; i < inputs_; ++i)
      g_w1[h * inputs_ + i] = delta * input[static_cast<std::size_t>(i)];
  }
  return 0.5 * err * err;
}

double MlpModel::predict(Position p) const
{
  const double in[2] = {in_x_.apply(p.x), in_y_.apply(p.y)};
  return out_.invert(net_.forward(in));
}

MlpModel fit_mlp(const TrainingSet &set, const MlpParams &params, Rng &rng)
{
  if (set.rows.size() < 2)
    throw InsufficientData("mlp: need at least two training rows");
  if (params.epochs < 0 || !(params.learning_rate > 0.0) || params.momentum < 0.0)
    throw std::invalid_argument("mlp: invalid training parameters");

  const std::size_t n = set.rows.size();
  std::vector<double> xs(n), ys(n), vs(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    xs[i] = set.rows[i].position.x;
    ys[i] = set.rows[i].position.y;
    vs[i] = set.rows[i].value;
  }
  if (!has_spread(xs) && !has_spread(ys))
    throw DegenerateData("mlp: all training positions are identical");

  const Standardization sx = fit_standardization(xs);
  const Standardization sy = fit_standardization(ys);
  const Standardization sv = fit_standardization(vs);

  std::vector<double> inputs(2 * n), targets(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    inputs[2 * i] = sx.apply(xs[i]);
    inputs[2 * i + 1] = sy.apply(ys[i]);
    targets[i] = sv.apply(vs[i]);
  }

  Mlp net(2, params.hidden);
  net.randomize(params.init_range, rng);

  auto weights = net.parameters();
  std::vector<double> grad(weights.size(), 0.0);
  std::vector<double> velocity(weights.size(), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < params.epochs; ++epoch)
  {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order)
    {
      net.loss_gradient(std::span<const double>(inputs).subspan(2 * idx, 2), targets[idx], grad);
      for (std::size_t k = 0; k < weights.size(); ++k)
      {
        velocity[k] = params.momentum * velocity[k] - params.learning_rate * grad[k];
        weights[k] += velocity[k];
      }
    }
  }
  return MlpModel(std::move(net), sx, sy, sv);
}

} // namespace imseek
