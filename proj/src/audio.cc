#include "sagasr/audio.h"

#include <cmath>
#include <string>

namespace sagasr {

AudioBuffer::AudioBuffer(std::size_t channels, std::size_t num_samples,
                         int sample_rate)
    : channels_(channels, std::vector<double>(num_samples, 0.0)),
      sample_rate_(sample_rate) {
  if (channels < 1 || channels > 2) {
    throw std::invalid_argument("audio: channels must be 1 or 2, got " +
                                std::to_string(channels));
  }
  if (sample_rate <= 0) {
    throw std::invalid_argument("audio: sample rate must be positive");
  }
}

AudioBuffer AudioBuffer::mono(std::vector<double> samples, int sample_rate) {
  AudioBuffer out(1, 0, sample_rate);
  out.channels_[0] = std::move(samples);
  return out;
}

AudioBuffer AudioBuffer::to_mono() const {
  if (channels() == 1) return *this;
  AudioBuffer out(1, num_samples(), sample_rate_);
  auto dst = out.channel(0);
  for (std::size_t c = 0; c < channels(); ++c) {
    const auto& src = channels_[c];
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  }
  const double scale = 1.0 / static_cast<double>(channels());
  for (double& v : dst) v *= scale;
  return out;
}

void AudioBuffer::validate() const {
  if (channels() < 1 || channels() > 2) {
    throw std::invalid_argument("audio: channels must be 1 or 2");
  }
  if (sample_rate_ <= 0) {
    throw std::invalid_argument("audio: sample rate must be positive");
  }
  for (const auto& ch : channels_) {
    if (ch.size() != channels_.front().size()) {
      throw std::invalid_argument("audio: ragged channels");
    }
    for (double v : ch) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("audio: non-finite sample");
      }
    }
  }
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace sagasr
