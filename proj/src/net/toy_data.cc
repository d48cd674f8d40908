#include "sagasr/net/toy_data.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "sagasr/dsp/fft.h"
#include "sagasr/dsp/rolloff.h"
#include "sagasr/dsp/stft.h"

namespace sagasr::net {
namespace {

constexpr double kPowerFloor = 1e-8;
constexpr double kMaxBandwidthHz = 21500.0;
constexpr double kMinBandwidthHz = 6000.0;
constexpr double kBandwidthMargin = 1.25;
constexpr std::uint64_t kCondTableSeed = 0x5a6a5eedULL;

double power_norm(std::size_t nfft) {
  const double half = static_cast<double>(nfft) / 2.0;
  return half * half;
}

double to_z(double p) { return (std::log10(p + kPowerFloor) + 8.0) / 4.0; }
double from_z(double z) { return std::max(0.0, std::pow(10.0, 4.0 * z - 8.0) - kPowerFloor); }

void add_harmonics(std::vector<double>& x, double f0, double bandwidth, int sr, bool odd_only,
                   double tilt, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int k = 1;; k += odd_only ? 2 : 1) {
    const double f = k * f0;
    if (f >= bandwidth) break;
    const double amp = std::pow(static_cast<double>(k), -tilt);
    const double w = 2.0 * std::numbers::pi * f / sr;
    const std::complex<double> step = std::polar(1.0, w);
    std::complex<double> rot = std::polar(1.0, phase(rng));
    for (double& v : x) {
      v += amp * rot.imag();
      rot *= step;
    }
  }
}

void add_tilted_noise(std::vector<double>& x, double bandwidth, int sr, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(x.size());
  for (double& v : white) v = normal(rng);
  auto spec = dsp::rfft(white);
  const double df = static_cast<double>(sr) / static_cast<double>(x.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = k * df;
    spec[k] *= f >= bandwidth || k == 0 ? 0.0 : 1.0 / std::sqrt(1.0 + f / 1000.0);
  }
  const auto shaped = dsp::irfft(spec, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += shaped[i];
}

}  // namespace

MelCodec::MelCodec(std::size_t bands, int sample_rate)
    : fb_(bands, dsp::kDefaultNfft, sample_rate) {}

Matrix MelCodec::encode(const AudioBuffer& audio) const {
  if (audio.sample_rate() != sample_rate()) {
    throw std::invalid_argument("mel codec: expected " + std::to_string(sample_rate()) +
                                " Hz input");
  }
  const dsp::Spectrogram spec = dsp::stft(audio);
  const double norm = power_norm(spec.nfft());
  Matrix z(bands(), spec.frames());
  std::vector<double> power(spec.bins()), mel(bands());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto fr = spec.frame(t);
    for (std::size_t k = 0; k < spec.bins(); ++k) power[k] = std::norm(fr[k]) / norm;
    fb_.project(power, mel);
    for (std::size_t b = 0; b < bands(); ++b) z(b, t) = to_z(mel[b]);
  }
  return z;
}

Matrix MelCodec::mask(const Matrix& z, double cutoff_hz) const {
  Matrix out = z;
  for (std::size_t b = cutoff_band(cutoff_hz); b < out.rows(); ++b) {
    for (std::size_t t = 0; t < out.cols(); ++t) out(b, t) = 0.0;
  }
  return out;
}

AudioBuffer MelCodec::decode(const Matrix& z, const AudioBuffer& phase_ref,
                             double cutoff_hz) const {
  const dsp::Spectrogram ref = dsp::stft(phase_ref);
  if (z.rows() != bands() || z.cols() != ref.frames()) {
    throw std::invalid_argument("mel codec: latent " + z.shape_string() +
                                " does not match the phase reference");
  }
  const double amp_norm = std::sqrt(power_norm(ref.nfft()));
  dsp::Spectrogram out(ref.frames(), ref.nfft(), ref.hop(), ref.sample_rate());
  std::vector<double> mel(bands()), power(ref.bins());
  for (std::size_t t = 0; t < ref.frames(); ++t) {
    for (std::size_t b = 0; b < bands(); ++b) mel[b] = from_z(z(b, t));
    fb_.unproject(mel, power);
    for (std::size_t k = 0; k < ref.bins(); ++k) {
      const double mag = amp_norm * std::sqrt(std::max(0.0, power[k]));
      std::complex<double> phase{1.0, 0.0};
      if (ref.bin_hz(k) < cutoff_hz) {
        const std::complex<double> r = ref.at(t, k);
        const double a = std::abs(r);
        phase = a > 0.0 ? r / a : std::complex<double>{1.0, 0.0};
      }
      out.at(t, k) = mag * phase;
    }
  }
  return dsp::istft(out, phase_ref.num_samples());
}

double mel_lsd(const Matrix& ref, const Matrix& est) {
  if (!ref.same_shape(est) || ref.size() == 0) {
    throw std::invalid_argument("mel_lsd: shape mismatch " + ref.shape_string() + " vs " +
                                est.shape_string());
  }
  double total = 0.0;
  for (std::size_t t = 0; t < ref.cols(); ++t) {
    double acc = 0.0;
    for (std::size_t b = 0; b < ref.rows(); ++b) {
      const double d = 4.0 * (est(b, t) - ref(b, t));
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(ref.rows()));
  }
  return total / static_cast<double>(ref.cols());
}

Matrix mel_lf_replace(const Matrix& generated, const Matrix& z_l, std::size_t band) {
  if (!generated.same_shape(z_l)) throw std::invalid_argument("mel_lf_replace: shape mismatch");
  Matrix out = generated;
  for (std::size_t b = 0; b < std::min(band, out.rows()); ++b) {
    for (std::size_t t = 0; t < out.cols(); ++t) out(b, t) = z_l(b, t);
  }
  return out;
}

Matrix class_condition(std::size_t label, std::size_t d_cond) {
  if (label >= kToyClasses) throw std::out_of_range("toy: class label out of range");
  std::mt19937_64 rng = degrade::stream_for(kCondTableSeed, label);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(kToyCondRows, d_cond);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

embed::CondBundle ToyDataset::cond_for(const ToyItem& item) const {
  embed::CondBundle c;
  c.cond_seq = class_condition(item.label, d_cond);
  c.f_l = item.f_l;
  c.f_h = item.f_h;
  return c;
}

AudioBuffer synth_toy_audio(std::mt19937_64& rng, std::size_t label, double bandwidth_hz) {
  constexpr int sr = degrade::kTargetRate;
  if (label >= kToyClasses) throw std::out_of_range("toy: class label out of range");
  if (!(bandwidth_hz > 0.0 && bandwidth_hz <= sr / 2.0)) {
    throw std::invalid_argument("toy: bandwidth outside (0, Nyquist]");
  }
  std::vector<double> x(kToySamples, 0.0);
  std::uniform_real_distribution<double> log_f0(std::log(100.0), std::log(400.0));
  std::uniform_real_distribution<double> gain_db(-6.0, 0.0);
  const double f0 = std::exp(log_f0(rng));
  switch (label) {
    case 0: add_harmonics(x, f0, bandwidth_hz, sr, false, 0.5, rng); break;
    case 1: add_harmonics(x, f0, bandwidth_hz, sr, true, 0.3, rng); break;
    default: add_tilted_noise(x, bandwidth_hz, sr, rng); break;
  }
  const double r = rms(x);
  const double g = r > 0.0 ? 0.1 * std::pow(10.0, gain_db(rng) / 20.0) / r : 0.0;
  for (double& v : x) v *= g;
  return AudioBuffer::mono(std::move(x), sr);
}

ToyItem make_toy_item(std::mt19937_64& rng, const MelCodec& codec, const ToyConfig& cfg) {
  ToyItem item;
  std::uniform_int_distribution<std::size_t> pick(0, kToyClasses - 1);
  item.label = pick(rng);
  const dsp::FilterSpec spec = degrade::sample_degradation(rng, cfg.degradation);
  item.cutoff_hz = spec.cutoff_hz;
  const double lo = std::max(kBandwidthMargin * spec.cutoff_hz, kMinBandwidthHz);
  std::uniform_real_distribution<double> bw(lo, std::max(lo, kMaxBandwidthHz));
  item.bandwidth_hz = bw(rng);

  AudioBuffer x_h = synth_toy_audio(rng, item.label, item.bandwidth_hz);
  AudioBuffer x_l = degrade::degrade(x_h, spec, degrade::ResampleMode::kFilterOnly);
  item.f_h_hz = dsp::spectral_rolloff(x_h);
  item.f_l_hz = dsp::spectral_rolloff(x_l);
  item.f_h = dsp::normalize_rolloff(item.f_h_hz, x_h.sample_rate());
  item.f_l = dsp::normalize_rolloff(item.f_l_hz, x_l.sample_rate());
  item.z_h = codec.encode(x_h);
  item.z_l = codec.mask(codec.encode(x_l), item.cutoff_hz);
  if (cfg.keep_audio) {
    item.x_h = std::move(x_h);
    item.x_l = std::move(x_l);
  }
  return item;
}

ToyDataset make_toy_dataset(std::size_t n_items, std::mt19937_64& rng, const ToyConfig& cfg) {
  if (n_items == 0) throw std::invalid_argument("make_toy_dataset: n_items must be >= 1");
  cfg.degradation.validate();
  const MelCodec codec;
  ToyDataset ds;
  ds.d_cond = cfg.d_cond;
  ds.items.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) ds.items.push_back(make_toy_item(rng, codec, cfg));
  return ds;
}

}  // namespace sagasr::net
