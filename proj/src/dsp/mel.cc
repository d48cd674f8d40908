#include "sagasr/dsp/mel.h"

#include <cmath>
#include <stdexcept>

#include "sagasr/linalg.h"

namespace sagasr::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(std::size_t bands, std::size_t nfft, int sample_rate)
    : sample_rate_(sample_rate), nfft_(nfft) {
  if (bands == 0 || nfft < 2 || sample_rate <= 0) {
    throw std::invalid_argument("mel: invalid filterbank configuration");
  }
  const std::size_t bins = nfft / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (bands + 1));
  }
  centers_hz_.assign(edges.begin() + 1, edges.end() - 1);

  weights_ = Matrix(bands, bins);
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / nfft;
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      weights_(b, k) = w;
    }
  }

  const Matrix wwt = matmul(weights_, weights_.transposed());
  pinv_ = matmul(weights_.transposed(), linalg::inverse_spd(wwt));
}

std::size_t MelFilterbank::first_band_at_or_above(double hz) const {
  std::size_t b = 0;
  while (b < centers_hz_.size() && centers_hz_[b] < hz) ++b;
  return b;
}

void MelFilterbank::project(std::span<const double> power,
                            std::span<double> mel) const {
  for (std::size_t b = 0; b < bands(); ++b) {
    double acc = 0.0;
    const auto w = weights_.row(b);
    for (std::size_t k = 0; k < bins(); ++k) acc += w[k] * power[k];
    mel[b] = acc;
  }
}

void MelFilterbank::unproject(std::span<const double> mel,
                              std::span<double> power) const {
  for (std::size_t k = 0; k < bins(); ++k) {
    double acc = 0.0;
    const auto p = pinv_.row(k);
    for (std::size_t b = 0; b < bands(); ++b) acc += p[b] * mel[b];
    power[k] = acc;
  }
}

}  // namespace sagasr::dsp
