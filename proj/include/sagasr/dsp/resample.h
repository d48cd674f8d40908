#pragma once

#include "sagasr/audio.h"

namespace sagasr::dsp {

// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel
// (beta 14, 64 zero crossings per side). Output length is
// round(num_samples * to_rate / from_rate). Samples outside the input are
// treated as zero.
AudioBuffer resample(const AudioBuffer& audio, int to_rate);

}  // namespace sagasr::dsp
