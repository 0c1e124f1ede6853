#ifndef IMSEEK_MODELS_HPP_
#define IMSEEK_MODELS_HPP_

#include "imseek/geometry.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace imseek
{

struct TrainingRow
{
  Position position;
  double value{0.0};
};

struct TrainingSet
{
  std::vector<TrainingRow> rows;
  bool capped{false};
};

inline constexpr std::size_t kDefaultTrainingCap = 10000;

/// Identity when the set fits, otherwise exactly `cap` rows drawn uniformly
/// without replacement (original row order kept).
TrainingSet subsample(const TrainingSet &set, std::size_t cap, Rng &rng);

class FitError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// No rows inside the local radius.
class InsufficientData : public FitError
{
public:
  using FitError::FitError;
};

/// Inputs without spread; standardization is undefined.
class DegenerateData : public FitError
{
public:
  using FitError::FitError;
};

enum class ModelKind
{
  Ridge,
  Mlp
};

const char *to_string(ModelKind kind);

/// Internal forward model: position -> expected target value.
class ForwardModel
{
public:
  virtual ~ForwardModel() = default;
  virtual ModelKind kind() const = 0;
  virtual double predict(Position p) const = 0;
};

// ---------------------------------------------------------------- ridge

struct RidgeParams
{
  double local_radius{5.0};
  double regularization{1.0};
};

struct PlaneWeights
{
  double intercept{0.0};
  double slope_x{0.0};
  double slope_y{0.0};
};

class RidgeModel final : public ForwardModel
{
public:
  RidgeModel(PlaneWeights w, Position center, std::size_t rows_used)
      : weights_(w), center_(center), rows_used_(rows_used)
  {
  }

  ModelKind kind() const override { return ModelKind::Ridge; }
  double predict(Position p) const override
  {
    return weights_.intercept + weights_.slope_x * p.x + weights_.slope_y * p.y;
  }

  const PlaneWeights &weights() const { return weights_; }
  Position center() const { return center_; }
  std::size_t rows_used() const { return rows_used_; }

private:
  PlaneWeights weights_;
  Position center_;
  std::size_t rows_used_;
};

/// Regularized least squares on raw coordinates, restricted to rows within
/// local_radius of center. The intercept is penalized like the slopes.
RidgeModel fit_ridge(const TrainingSet &set, const RidgeParams &params, Position center);

// ---------------------------------------------------------------- MLP

struct MlpParams
{
  int hidden{100};
  double learning_rate{0.01};
  double momentum{0.1};
  int epochs{3};
  double init_range{0.5}; // uniform in [-init_range, init_range]
};

/**
 * Single hidden layer perceptron: sigmoid hidden units, linear output, bias
 * on every layer. Parameters live in one flat vector laid out as
 * [hidden weights (hidden x inputs, row-major) | hidden biases |
 *  output weights | output bias].
 */
class Mlp
{
public:
  Mlp(int inputs, int hidden);

  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::size_t hidden_weight_offset() const { return 0; }
  std::size_t hidden_bias_offset() const { return static_cast<std::size_t>(hidden_ * inputs_); }
  std::size_t output_weight_offset() const { return hidden_bias_offset() + hidden_; }
  std::size_t output_bias_offset() const { return output_weight_offset() + hidden_; }

  void randomize(double range, Rng &rng);

  double forward(std::span<const double> input) const;

  /// Loss 0.5 * (forward(input) - target)^2; writes dLoss/dparams into grad
  /// (same layout as parameters()) and returns the loss.
  double loss_gradient(std::span<const double> input, double target, std::span<double> grad) const;

private:
  int inputs_;
  int hidden_;
  std::vector<double> params_;
  mutable std::vector<double> activation_; // scratch
};

struct Standardization
{
  double mean{0.0};
  double scale{1.0};

  double apply(double v) const { return (v - mean) / scale; }
  double invert(double z) const { return z * scale + mean; }
};

class MlpModel final : public ForwardModel
{
public:
  MlpModel(Mlp net, Standardization x, Standardization y, Standardization out)
      : net_(std::move(net)), in_x_(x), in_y_(y), out_(out)
  {
  }

  ModelKind kind() const override { return ModelKind::Mlp; }
  double predict(Position p) const override;

  const Mlp &network() const { return net_; }

private:
  Mlp net_;
  Standardization in_x_;
  Standardization in_y_;
  Standardization out_;
};

/// Standardizes inputs and targets, then runs per-sample backpropagation
/// with momentum for a fixed number of epochs (reshuffled each epoch).
MlpModel fit_mlp(const TrainingSet &set, const MlpParams &params, Rng &rng);

// ---------------------------------------------------------------- dispatch

using ModelParams = std::variant<RidgeParams, MlpParams>;

ModelKind kind_of(const ModelParams &params);

/// `center` is only used by the ridge model.
std::shared_ptr<const ForwardModel> fit_model(const ModelParams &params, const TrainingSet &set, Position center,
                                              Rng &rng);

} // namespace imseek

#endif // IMSEEK_MODELS_HPP_
