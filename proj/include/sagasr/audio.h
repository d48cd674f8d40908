#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sagasr {

// Planar multi-channel waveform. channels() is 1 or 2.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::size_t channels, std::size_t num_samples, int sample_rate);
  static AudioBuffer mono(std::vector<double> samples, int sample_rate);

  std::size_t channels() const { return channels_.size(); }
  std::size_t num_samples() const {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  int sample_rate() const { return sample_rate_; }
  bool empty() const { return num_samples() == 0; }

  std::span<double> channel(std::size_t c) { return channels_.at(c); }
  std::span<const double> channel(std::size_t c) const {
    return channels_.at(c);
  }

  // Channel average; returns a copy when already mono.
  AudioBuffer to_mono() const;

  // Throws std::invalid_argument if any invariant is broken.
  void validate() const;

 private:
  std::vector<std::vector<double>> channels_;
  int sample_rate_ = 0;
};

double rms(std::span<const double> x);

}  // namespace sagasr
