#include "sagasr/dsp/resample.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sagasr::dsp {
namespace {

constexpr double kBeta = 14.0;
constexpr int kZeroCrossings = 64;

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Polyphase table: for each phase p in [0, up), taps[p * ntaps + j] weights
// input sample (base - half + 1 + j) for an output at base + p / up.
struct Polyphase {
  long long up = 1;
  long long down = 1;
  int half = 0;
  int ntaps = 0;
  std::vector<double> taps;
};

Polyphase build(long long up, long long down) {
  Polyphase pp;
  pp.up = up;
  pp.down = down;
  // Kernel bandwidth relative to the input rate.
  const double rho = std::min(1.0, static_cast<double>(up) / down);
  const double width = kZeroCrossings / rho;
  pp.half = static_cast<int>(std::ceil(width));
  pp.ntaps = 2 * pp.half;
  pp.taps.assign(static_cast<std::size_t>(up) * pp.ntaps, 0.0);
  const double norm_i0 = bessel_i0(kBeta);
  for (long long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double* row = pp.taps.data() + p * pp.ntaps;
    double sum = 0.0;
    for (int j = 0; j < pp.ntaps; ++j) {
      // Distance from the output instant to input sample (base - half + 1 + j).
      const double d = frac + (pp.half - 1 - j);
      const double x = d / width;
      double w = 0.0;
      if (std::abs(x) < 1.0) {
        w = bessel_i0(kBeta * std::sqrt(1.0 - x * x)) / norm_i0;
      }
      row[j] = rho * sinc(rho * d) * w;
      sum += row[j];
    }
    // Unit DC gain per phase.
    if (sum != 0.0) {
      for (int j = 0; j < pp.ntaps; ++j) row[j] /= sum;
    }
  }
  return pp;
}

std::vector<double> run(std::span<const double> x, const Polyphase& pp,
                        std::size_t out_len) {
  std::vector<double> y(out_len, 0.0);
  const long long n = static_cast<long long>(x.size());
  for (std::size_t m = 0; m < out_len; ++m) {
    const long long pos = static_cast<long long>(m) * pp.down;
    const long long base = pos / pp.up;
    const long long phase = pos % pp.up;
    const double* row = pp.taps.data() + phase * pp.ntaps;
    const long long first = base - pp.half + 1;
    const int j0 = static_cast<int>(std::max(0LL, -first));
    const int j1 = static_cast<int>(std::min<long long>(pp.ntaps, n - first));
    double acc = 0.0;
    for (int j = j0; j < j1; ++j) acc += row[j] * x[first + j];
    y[m] = acc;
  }
  return y;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& audio, int to_rate) {
  if (to_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
  const int from_rate = audio.sample_rate();
  if (to_rate == from_rate) return audio;

  const long long g = std::gcd(static_cast<long long>(from_rate),
                               static_cast<long long>(to_rate));
  const Polyphase pp = build(to_rate / g, from_rate / g);
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(audio.num_samples()) * to_rate / from_rate));

  AudioBuffer out(audio.channels(), out_len, to_rate);
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    const auto y = run(audio.channel(c), pp, out_len);
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  return out;
}

}  // namespace sagasr::dsp
