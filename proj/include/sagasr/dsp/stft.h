#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sagasr/audio.h"

namespace sagasr::dsp {

inline constexpr std::size_t kDefaultNfft = 2048;
inline constexpr std::size_t kDefaultHop = 512;

enum class Window { kHann };

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Complex STFT frames, row-major [frames x (nfft/2 + 1)].
class Spectrogram {
 public:
  Spectrogram(std::size_t frames, std::size_t nfft, std::size_t hop,
              int sample_rate);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return nfft_ / 2 + 1; }
  std::size_t nfft() const { return nfft_; }
  std::size_t hop() const { return hop_; }
  Window window() const { return Window::kHann; }
  int sample_rate() const { return sample_rate_; }

  std::span<std::complex<double>> frame(std::size_t t) {
    return {data_.data() + t * bins(), bins()};
  }
  std::span<const std::complex<double>> frame(std::size_t t) const {
    return {data_.data() + t * bins(), bins()};
  }
  std::complex<double>& at(std::size_t t, std::size_t k) {
    return data_[t * bins() + k];
  }
  const std::complex<double>& at(std::size_t t, std::size_t k) const {
    return data_[t * bins() + k];
  }

  // Center frequency of bin k in Hz.
  double bin_hz(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_ / static_cast<double>(nfft_);
  }

  // |X| summed over frames, one value per bin.
  std::vector<double> time_summed_magnitude() const;

  std::span<std::complex<double>> data() { return data_; }
  std::span<const std::complex<double>> data() const { return data_; }

 private:
  std::size_t frames_;
  std::size_t nfft_;
  std::size_t hop_;
  int sample_rate_;
  std::vector<std::complex<double>> data_;
};

// Centered STFT with reflect padding of nfft/2 on both sides and a periodic
// Hann analysis window. Multi-channel input is averaged to mono.
// Frame count is floor(num_samples / hop) + 1.
Spectrogram stft(const AudioBuffer& audio, std::size_t nfft = kDefaultNfft,
                 std::size_t hop = kDefaultHop);
Spectrogram stft(std::span<const double> samples, int sample_rate,
                 std::size_t nfft = kDefaultNfft,
                 std::size_t hop = kDefaultHop);

// Weighted overlap-add inverse (Hann synthesis window, normalized by the
// summed squared window). Output length defaults to (frames - 1) * hop.
AudioBuffer istft(const Spectrogram& spec,
                  std::optional<std::size_t> length = std::nullopt);

}  // namespace sagasr::dsp
