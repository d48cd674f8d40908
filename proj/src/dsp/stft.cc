#include "sagasr/dsp/stft.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sagasr/dsp/fft.h"

namespace sagasr::dsp {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// numpy-style "reflect" index for a padded position, repeating the mirror
// for pads longer than the signal.
std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n) - 2;
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

Spectrogram::Spectrogram(std::size_t frames, std::size_t nfft, std::size_t hop,
                         int sample_rate)
    : frames_(frames), nfft_(nfft), hop_(hop), sample_rate_(sample_rate) {
  if (nfft == 0 || hop == 0 || hop > nfft) {
    throw std::invalid_argument("spectrogram: need 0 < hop <= nfft");
  }
  data_.assign(frames * bins(), {0.0, 0.0});
}

std::vector<double> Spectrogram::time_summed_magnitude() const {
  std::vector<double> out(bins(), 0.0);
  for (std::size_t t = 0; t < frames_; ++t) {
    const auto f = frame(t);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += std::abs(f[k]);
  }
  return out;
}

Spectrogram stft(std::span<const double> samples, int sample_rate,
                 std::size_t nfft, std::size_t hop) {
  if (samples.empty()) throw std::invalid_argument("stft: empty input");
  if (!is_power_of_two(nfft)) {
    throw std::invalid_argument("stft: nfft must be a power of two");
  }
  const std::size_t n = samples.size();
  const std::size_t frames = n / hop + 1;
  const long long pad = static_cast<long long>(nfft / 2);
  Spectrogram spec(frames, nfft, hop, sample_rate);

  const auto window = hann_window(nfft);
  std::vector<double> buf(nfft);
  for (std::size_t t = 0; t < frames; ++t) {
    const long long start = static_cast<long long>(t * hop) - pad;
    for (std::size_t i = 0; i < nfft; ++i) {
      const long long pos = start + static_cast<long long>(i);
      const bool inside = pos >= 0 && pos < static_cast<long long>(n);
      const double v = inside ? samples[static_cast<std::size_t>(pos)]
                              : samples[reflect_index(pos, n)];
      buf[i] = v * window[i];
    }
    rfft(buf, spec.frame(t));
  }
  return spec;
}

Spectrogram stft(const AudioBuffer& audio, std::size_t nfft, std::size_t hop) {
  if (audio.empty()) throw std::invalid_argument("stft: empty input");
  if (audio.channels() == 1) {
    return stft(audio.channel(0), audio.sample_rate(), nfft, hop);
  }
  const AudioBuffer m = audio.to_mono();
  return stft(m.channel(0), audio.sample_rate(), nfft, hop);
}

AudioBuffer istft(const Spectrogram& spec, std::optional<std::size_t> length) {
  const std::size_t nfft = spec.nfft();
  const std::size_t hop = spec.hop();
  if (hop > nfft / 2) {
    throw std::invalid_argument("istft: hop > nfft/2 violates COLA for Hann");
  }
  const std::size_t frames = spec.frames();
  const std::size_t out_len =
      length.value_or(frames == 0 ? 0 : (frames - 1) * hop);
  const std::size_t pad = nfft / 2;
  const std::size_t total = frames == 0 ? 0 : (frames - 1) * hop + nfft;

  const auto window = hann_window(nfft);
  std::vector<double> acc(total, 0.0);
  std::vector<double> norm(total, 0.0);
  std::vector<double> buf(nfft);
  for (std::size_t t = 0; t < frames; ++t) {
    irfft(spec.frame(t), buf);
    const std::size_t off = t * hop;
    for (std::size_t i = 0; i < nfft; ++i) {
      acc[off + i] += buf[i] * window[i];
      norm[off + i] += window[i] * window[i];
    }
  }

  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = i + pad;
    if (j < total && norm[j] > 1e-10) out[i] = acc[j] / norm[j];
  }
  return AudioBuffer::mono(std::move(out), spec.sample_rate());
}

}  // namespace sagasr::dsp
