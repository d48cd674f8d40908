#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sagasr/matrix.h"

namespace sagasr::dsp {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular HTK-mel filterbank mapping nfft/2+1 linear power bins onto
// `bands` mel bands between 0 Hz and Nyquist.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t bands, std::size_t nfft, int sample_rate);

  std::size_t bands() const { return weights_.rows(); }
  std::size_t bins() const { return weights_.cols(); }
  int sample_rate() const { return sample_rate_; }
  std::size_t nfft() const { return nfft_; }

  double center_hz(std::size_t band) const { return centers_hz_.at(band); }
  // Index of the first band whose center frequency is >= hz.
  std::size_t first_band_at_or_above(double hz) const;

  const Matrix& weights() const { return weights_; }
  // Moore-Penrose pseudo-inverse W^T (W W^T)^-1, [bins x bands].
  const Matrix& pseudo_inverse() const { return pinv_; }

  void project(std::span<const double> power, std::span<double> mel) const;
  void unproject(std::span<const double> mel, std::span<double> power) const;

 private:
  int sample_rate_;
  std::size_t nfft_;
  std::vector<double> centers_hz_;
  Matrix weights_;
  Matrix pinv_;
};

}  // namespace sagasr::dsp
