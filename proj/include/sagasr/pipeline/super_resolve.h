#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sagasr/audio.h"
#include "sagasr/flow/flow.h"
#include "sagasr/matrix.h"
#include "sagasr/net/model.h"
#include "sagasr/net/toy_data.h"

namespace sagasr::pipeline {

inline constexpr double kDefaultTargetRolloff = 0.95;

struct SampleConfig {
  double target_rolloff = kDefaultTargetRolloff;  // normalized f_h
  flow::GuidanceScales scales;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  // Toy class condition; none means the null text condition.
  std::optional<std::size_t> class_label;
};

struct SampleResult {
  AudioBuffer audio;       // 44.1 kHz, input channel count
  double input_rolloff_hz = 0.0;
  double f_l = 0.0;
  Matrix z_l;              // masked input latent
  Matrix z_gen;            // sampled latent before decoding
};

// Schedule used for a given step count: linear part steps/4 on a 10*steps grid.
flow::TSchedule sampling_schedule(std::size_t steps);

// Measures the input roll-off, masks the input mel frames above it, samples
// the high band chunk by chunk with guided Euler integration, decodes to
// audio and splices the input back in below the measured roll-off.
SampleResult super_resolve(const net::MiniDit& model, const AudioBuffer& input,
                           const SampleConfig& cfg);

struct ToyEval {
  double model_lsd = 0.0;     // mean mel-LSD of guided samples
  double baseline_lsd = 0.0;  // mean mel-LSD of z_l itself (empty high band)
  std::vector<double> per_item;
};

// Guided sampling on every item of a held-out toy set, conditioned on the
// item's own roll-offs and class, with the bands below the cutoff copied
// back from z_l before scoring against z_h.
ToyEval evaluate_toy(const net::MiniDit& model, const net::ToyDataset& test,
                     const flow::GuidanceScales& scales, std::size_t steps, std::uint64_t seed);

}  // namespace sagasr::pipeline
