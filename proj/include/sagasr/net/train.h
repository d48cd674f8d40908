#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "sagasr/flow/flow.h"
#include "sagasr/net/model.h"
#include "sagasr/net/optim.h"
#include "sagasr/net/toy_data.h"

namespace sagasr::net {

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch = 16;
  std::uint64_t seed = 0;
  // Toy-scale learning rate; the full-scale 1e-5 is far too slow for a
  // 2 000-step run from scratch.
  AdamWConfig adam{1e-3, 0.9, 0.999, 1e-8, 0.0};
  double inv_gamma = 1e6;
  double power = 0.5;
  double warmup = 0.99;
  flow::FmConfig fm;
};

struct TrainResult {
  std::vector<double> loss_curve;  // batch-mean loss, one per step
  OptimState optim;
};

// Called after every step with (step index, batch loss).
using StepCallback = std::function<void(std::size_t, double)>;

// Minibatch flow-matching training: each step draws `batch` item indices,
// accumulates fm_loss gradients (weighted 1/batch) in item order, then takes
// one AdamW step scaled by inverse_lr. Throws "train: divergence at step N"
// on a non-finite loss or update.
TrainResult train(MiniDit& model, const ToyDataset& data, const TrainConfig& cfg,
                  const StepCallback& on_step = {});

// Continues from an existing optimizer state (its step counter included).
TrainResult train(MiniDit& model, const ToyDataset& data, const TrainConfig& cfg,
                  OptimState state, const StepCallback& on_step = {});

// Mean of the trailing `window` values ending at index `end` (inclusive).
double smoothed(const std::vector<double>& curve, std::size_t end, std::size_t window);

}  // namespace sagasr::net
