#include "sagasr/dsp/rolloff.h"

#include <algorithm>
#include <stdexcept>

namespace sagasr::dsp {

double spectral_rolloff(const Spectrogram& spec, double roll_percent) {
  if (!(roll_percent > 0.0 && roll_percent < 1.0)) {
    throw std::invalid_argument("rolloff: roll_percent must be in (0, 1)");
  }
  const auto mag = spec.time_summed_magnitude();
  double total = 0.0;
  for (double m : mag) total += m;
  if (total <= 0.0) return 0.0;

  const double threshold = roll_percent * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cumulative += mag[k];
    if (cumulative >= threshold) return spec.bin_hz(k);
  }
  return spec.bin_hz(mag.size() - 1);
}

double spectral_rolloff(const AudioBuffer& audio, double roll_percent) {
  return spectral_rolloff(stft(audio), roll_percent);
}

double normalize_rolloff(double hz, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (hz < 0.0 || hz > nyquist) {
    throw std::invalid_argument("normalize_rolloff: frequency outside [0, Nyquist]");
  }
  return std::clamp(hz / nyquist, 0.0, kMaxNormalizedRolloff);
}

double denormalize_rolloff(double normalized, int sample_rate) {
  return normalized * sample_rate / 2.0;
}

}  // namespace sagasr::dsp
