#include "imseek/models.hpp"

#include <algorithm>
#include <numeric>

namespace imseek
{

const char *to_string(ModelKind kind)
{
  return kind == ModelKind::Ridge ? "ridge" : "mlp";
}

TrainingSet subsample(const TrainingSet &set, std::size_t cap, Rng &rng)
{
  if (cap < 1)
    throw std::invalid_argument("subsample: cap must be at least 1");
  if (set.rows.size() <= cap)
    return set;

  // partial Fisher-Yates: the first `cap` slots end up a uniform draw
  std::vector<std::size_t> idx(set.rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < cap; ++i)
  {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());

  TrainingSet out;
  out.capped = true;
  out.rows.reserve(cap);
  for (std::size_t i : idx)
    out.rows.push_back(set.rows[i]);
  return out;
}

ModelKind kind_of(const ModelParams &params)
{
  return std::holds_alternative<RidgeParams>(params) ? ModelKind::Ridge : ModelKind::Mlp;
}

std::shared_ptr<const ForwardModel> fit_model(const ModelParams &params, const TrainingSet &set, Position center,
                                              Rng &rng)
{
  if (const auto *ridge = std::get_if<RidgeParams>(&params))
    return std::make_shared<RidgeModel>(fit_ridge(set, *ridge, center));
  return std::make_shared<MlpModel>(fit_mlp(set, std::get<MlpParams>(params), rng));
}

} // namespace imseek
