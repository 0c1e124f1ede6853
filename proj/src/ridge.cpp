#include "imseek/models.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace imseek
{

RidgeModel fit_ridge(const TrainingSet &set, const RidgeParams &params, Position center)
{
  if (!(params.local_radius > 0.0) || !(params.regularization >= 0.0))
    throw std::invalid_argument("ridge: local_radius must be positive and regularization non-negative");

  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  std::size_t used = 0;
  const double r2 = params.local_radius * params.local_radius;
  for (const auto &row : set.rows)
  {
    const Position d = row.position - center;
    if (dot(d, d) > r2)
      continue;
    const Eigen::Vector3d feature(1.0, row.position.x, row.position.y);
    gram.noalias() += feature * feature.transpose();
    rhs.noalias() += row.value * feature;
    ++used;
  }
  if (used == 0)
    throw InsufficientData("ridge: no training rows within the local radius");

  gram.diagonal().array() += params.regularization;
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(gram);
  const Eigen::Vector3d w = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !w.allFinite() || (params.regularization == 0.0 && !ldlt.isPositive()))
    throw DegenerateData("ridge: singular normal equations");
  if (params.regularization == 0.0 && (gram * w - rhs).norm() > 1e-6 * (1.0 + rhs.norm()))
    throw DegenerateData("ridge: singular normal equations");

  return RidgeModel(PlaneWeights{w(0), w(1), w(2)}, center, used);
}

} // namespace imseek
