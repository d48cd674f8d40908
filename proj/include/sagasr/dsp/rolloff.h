#pragma once

#include "sagasr/audio.h"
#include "sagasr/dsp/stft.h"

namespace sagasr::dsp {

inline constexpr double kDefaultRollPercent = 0.985;
inline constexpr double kMaxNormalizedRolloff = 1.0 - 1e-6;

// Single roll-off value for a whole clip: the magnitude spectrogram is summed
// over time first, then the smallest bin whose cumulative magnitude reaches
// roll_percent of the total is returned as a frequency in Hz.
// A silent spectrogram yields 0 Hz.
double spectral_rolloff(const Spectrogram& spec,
                        double roll_percent = kDefaultRollPercent);

// STFT (2048/512) followed by spectral_rolloff.
double spectral_rolloff(const AudioBuffer& audio,
                        double roll_percent = kDefaultRollPercent);

// Maps [0, Nyquist] onto [0, 1 - 1e-6].
double normalize_rolloff(double hz, int sample_rate);

// Inverse of normalize_rolloff (ignoring the clamp).
double denormalize_rolloff(double normalized, int sample_rate);

}  // namespace sagasr::dsp
