#include "sagasr/dsp/lf_replace.h"

#include <algorithm>
#include <stdexcept>

#include "sagasr/dsp/fft.h"

namespace sagasr::dsp {

AudioBuffer low_frequency_replacement(const AudioBuffer& generated,
                                      const AudioBuffer& input_fullrate,
                                      double cutoff_hz) {
  if (generated.num_samples() != input_fullrate.num_samples() ||
      generated.sample_rate() != input_fullrate.sample_rate() ||
      generated.channels() != input_fullrate.channels()) {
    throw std::invalid_argument("lf_replace: length/rate mismatch");
  }
  const int sr = generated.sample_rate();
  if (!(cutoff_hz > 0.0)) {
    throw std::invalid_argument("lf_replace: cutoff must be positive");
  }
  const std::size_t n = generated.num_samples();
  if (n == 0) return generated;

  const std::size_t bins = n / 2 + 1;
  const bool all_bins = cutoff_hz >= sr / 2.0;
  // First bin taken from the generated signal.
  std::size_t boundary = bins;
  if (!all_bins) {
    boundary = 0;
    while (boundary < bins &&
           static_cast<double>(boundary) * sr / static_cast<double>(n) < cutoff_hz) {
      ++boundary;
    }
  }

  AudioBuffer out(generated.channels(), n, sr);
  for (std::size_t c = 0; c < generated.channels(); ++c) {
    auto spec_gen = rfft(generated.channel(c));
    const auto spec_in = rfft(input_fullrate.channel(c));
    std::copy(spec_in.begin(), spec_in.begin() + static_cast<long>(boundary),
              spec_gen.begin());
    irfft(spec_gen, out.channel(c));
  }
  return out;
}

}  // namespace sagasr::dsp
