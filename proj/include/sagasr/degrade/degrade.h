#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sagasr/audio.h"
#include "sagasr/dsp/iir.h"

namespace sagasr::degrade {

inline constexpr int kTargetRate = 44100;
inline constexpr double kSegmentSeconds = 5.94;

enum class ResampleMode { kFilterOnly, kFilterAndResample };

std::string mode_name(ResampleMode m);
ResampleMode parse_mode(const std::string& name);

struct DegradeConfig {
  double cutoff_min_hz = 2000.0;
  double cutoff_max_hz = 16000.0;
  int order_min = 2;
  int order_max = 10;
  std::vector<dsp::FilterFamily> families{std::begin(dsp::kAllFamilies),
                                          std::end(dsp::kAllFamilies)};
  ResampleMode resample_mode = ResampleMode::kFilterOnly;
  std::uint64_t seed = 0;

  void validate() const;
};

using Rng = std::mt19937_64;

// One independent stream per (seed, index), for corpus-level parallelism.
Rng stream_for(std::uint64_t seed, std::uint64_t index);

// cutoff ~ U[min, max], family uniform, order uniform over [order_min, order_max].
dsp::FilterSpec sample_degradation(Rng& rng, const DegradeConfig& cfg);

// Low-pass `audio` (44.1 kHz) with `spec`; in kFilterAndResample mode the
// filtered signal is additionally taken down to round(2 * cutoff) Hz and back
// up to the original rate, then trimmed/zero-extended to the input length.
AudioBuffer degrade(const AudioBuffer& audio, const dsp::FilterSpec& spec,
                    ResampleMode mode);

// Random fixed-length excerpt of round(duration_s * rate) samples.
// Throws "too short" when the input cannot hold one excerpt.
AudioBuffer segment(const AudioBuffer& audio, Rng& rng,
                    double duration_s = kSegmentSeconds);

}  // namespace sagasr::degrade
