#pragma once

#include "sagasr/audio.h"

namespace sagasr::dsp {

// Splices the trusted low band of `input_fullrate` under the high band of
// `generated`. Both signals are transformed with one real DFT over their
// full length; bins whose frequency lies strictly below cutoff_hz come from
// the input, the rest from the generated signal. A cutoff at (or above)
// Nyquist takes every bin from the input. The hard boundary makes the
// operation an exact projection, so applying it twice changes nothing.
AudioBuffer low_frequency_replacement(const AudioBuffer& generated,
                                      const AudioBuffer& input_fullrate,
                                      double cutoff_hz);

}  // namespace sagasr::dsp
