#include "sagasr/net/train.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace sagasr::net {

TrainResult train(MiniDit& model, const ToyDataset& data, const TrainConfig& cfg,
                  const StepCallback& on_step) {
  OptimState state;
  state.cfg = cfg.adam;
  return train(model, data, cfg, std::move(state), on_step);
}

TrainResult train(MiniDit& model, const ToyDataset& data, const TrainConfig& cfg,
                  OptimState state, const StepCallback& on_step) {
  if (data.items.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch == 0) throw std::invalid_argument("train: batch must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const double weight = 1.0 / static_cast<double>(cfg.batch);

  TrainResult result;
  result.loss_curve.reserve(cfg.steps);
  std::vector<embed::CondBundle> conds;
  conds.reserve(data.size());
  for (const ToyItem& item : data.items) conds.push_back(data.cond_for(item));

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    model.params().zero_grad();
    double loss = 0.0;
    try {
      for (std::size_t b = 0; b < cfg.batch; ++b) {
        const std::size_t i = pick(rng);
        const ToyItem& item = data.items[i];
        loss += weight * flow::fm_loss(model, item.z_h, item.z_l, conds[i], rng, cfg.fm, weight);
      }
      const double mult = inverse_lr(state.step, cfg.inv_gamma, cfg.power, cfg.warmup);
      adamw_step(model.params(), state, mult);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("train: divergence at step " + std::to_string(step) + " (" +
                               e.what() + ")");
    }
    result.loss_curve.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  result.optim = std::move(state);
  return result;
}

double smoothed(const std::vector<double>& curve, std::size_t end, std::size_t window) {
  if (end >= curve.size() || window == 0) throw std::out_of_range("smoothed: bad range");
  const std::size_t begin = end + 1 >= window ? end + 1 - window : 0;
  double acc = 0.0;
  for (std::size_t i = begin; i <= end; ++i) acc += curve[i];
  return acc / static_cast<double>(end + 1 - begin);
}

}  // namespace sagasr::net
