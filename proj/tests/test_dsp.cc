#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "sagasr/dsp/fft.h"
#include "sagasr/dsp/iir.h"
#include "sagasr/dsp/lf_replace.h"
#include "sagasr/dsp/mel.h"
#include "sagasr/dsp/resample.h"
#include "sagasr/dsp/rolloff.h"
#include "sagasr/dsp/stft.h"

using namespace sagasr;
using namespace sagasr::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

AudioBuffer sine(double hz, std::size_t n, int sr, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * hz * i / sr);
  return AudioBuffer::mono(std::move(x), sr);
}

AudioBuffer noise(std::size_t n, int sr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return AudioBuffer::mono(std::move(x), sr);
}

double db(double x) { return 20.0 * std::log10(x); }

// Energy of the bins of a full-length DFT that lie below / at-or-above hz.
std::pair<double, double> band_energy(std::span<const double> x, int sr, double hz) {
  const auto spec = rfft(x);
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * sr / static_cast<double>(x.size());
    (f < hz ? lo : hi) += std::norm(spec[k]);
  }
  return {lo, hi};
}

}  // namespace

TEST(Fft, MatchesDirectDft) {
  const auto x = noise(30, 1000, 1);
  const auto got = rfft(x.channel(0));
  for (std::size_t k = 0; k < got.size(); ++k) {
    std::complex<double> ref{0.0, 0.0};
    for (std::size_t n = 0; n < 30; ++n) {
      ref += x.channel(0)[n] * std::polar(1.0, -2.0 * kPi * k * n / 30.0);
    }
    EXPECT_NEAR(std::abs(got[k] - ref), 0.0, 1e-12);
  }
  const auto back = irfft(got, 30);
  for (std::size_t n = 0; n < 30; ++n) EXPECT_NEAR(back[n], x.channel(0)[n], 1e-14);
}

TEST(Stft, ZeroSignalGivesZeroBins) {
  const AudioBuffer x(1, 8000, 44100);
  const Spectrogram s = stft(x);
  for (const auto& v : s.data()) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Stft, ConstantSignalDcBinIsWindowSum) {
  const auto x = AudioBuffer::mono(std::vector<double>(10000, 1.0), 44100);
  const Spectrogram s = stft(x);
  double window_sum = 0.0;
  for (int n = 0; n < 2048; ++n) window_sum += 0.5 - 0.5 * std::cos(2.0 * kPi * n / 2048.0);
  ASSERT_NEAR(window_sum, 1024.0, 1e-9);
  for (std::size_t t = 0; t < s.frames(); ++t) {
    EXPECT_NEAR(std::abs(s.at(t, 0)), window_sum, 1e-9);
    for (std::size_t k = 2; k < s.bins(); ++k) EXPECT_LT(std::abs(s.at(t, k)), 1e-9);
  }
}

TEST(Stft, SinePeaksAtExpectedBin) {
  const Spectrogram s = stft(sine(1000.0, 20000, 44100));
  const std::size_t expected = static_cast<std::size_t>(std::lround(1000.0 * 2048 / 44100));
  ASSERT_EQ(expected, 46u);
  // Frames whose window lies fully inside the signal (no reflected padding).
  for (std::size_t t = 2; t + 2 < s.frames(); ++t) {
    const auto fr = s.frame(t);
    const auto it = std::max_element(fr.begin(), fr.end(), [](auto a, auto b) {
      return std::abs(a) < std::abs(b);
    });
    EXPECT_EQ(static_cast<std::size_t>(it - fr.begin()), expected);
  }
}

TEST(Stft, FrameCountAndErrors) {
  EXPECT_EQ(stft(noise(10000, 44100, 2)).frames(), 10000u / 512 + 1);
  EXPECT_THROW(stft(AudioBuffer(1, 0, 44100)), std::invalid_argument);
  try {
    stft(AudioBuffer(1, 0, 44100));
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("empty input"), std::string::npos);
  }
  EXPECT_THROW(stft(noise(5000, 44100, 3), 1000, 250), std::invalid_argument);
}

TEST(Istft, RoundTripInterior) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = noise(6000 + 37 * seed, 44100, seed);
    const AudioBuffer y = istft(stft(x), x.num_samples());
    ASSERT_EQ(y.num_samples(), x.num_samples());
    double err = 0.0;
    for (std::size_t i = 2048; i + 2048 < x.num_samples(); ++i) {
      err = std::max(err, std::abs(y.channel(0)[i] - x.channel(0)[i]));
    }
    ASSERT_LT(err, 1e-6) << "seed " << seed;
  }
}

TEST(Istft, ZeroAndLinearity) {
  Spectrogram z(10, 2048, 512, 44100);
  for (double v : istft(z).channel(0)) EXPECT_EQ(v, 0.0);

  const Spectrogram a = stft(noise(8000, 44100, 4));
  const Spectrogram b = stft(noise(8000, 44100, 5));
  Spectrogram sum = a;
  for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] += b.data()[i];
  const auto ya = istft(a), yb = istft(b), ys = istft(sum);
  for (std::size_t i = 0; i < ys.num_samples(); ++i) {
    EXPECT_NEAR(ys.channel(0)[i], ya.channel(0)[i] + yb.channel(0)[i], 1e-9);
  }
}

TEST(Istft, RejectsHopAboveHalfWindow) {
  Spectrogram s(4, 2048, 1536, 44100);
  EXPECT_THROW(istft(s), std::invalid_argument);
}

TEST(Rolloff, SilenceIsZero) {
  EXPECT_EQ(spectral_rolloff(stft(AudioBuffer(1, 8000, 44100))), 0.0);
}

TEST(Rolloff, FlatSpectrumHandOracle) {
  Spectrogram s(3, 2048, 512, 44100);
  for (auto& v : s.data()) v = {1.0, 0.0};
  const std::size_t k = static_cast<std::size_t>(std::ceil(0.985 * 1025)) - 1;
  ASSERT_EQ(k, 1009u);
  EXPECT_EQ(spectral_rolloff(s), k * 44100.0 / 2048.0);
  EXPECT_NEAR(spectral_rolloff(s), 21725.7, 44100.0 / 2048.0);
}

TEST(Rolloff, SineMatchesReference) {
  // Magnitude leakage from the Hann sidelobes and the reflect-padded edge
  // frames carries 1.5 % of the magnitude well above the tone. Reference:
  // scipy.signal.stft(hann, 2048, overlap 1536, boundary='even') cumulative
  // magnitude at 0.985 lands on bin 69.
  EXPECT_EQ(spectral_rolloff(sine(1000.0, 44100, 44100)), 69 * 44100.0 / 2048.0);
}

TEST(Rolloff, MonotoneInPercentAndAmplitudeInvariant) {
  const auto x = noise(20000, 44100, 6);
  double prev = 0.0;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double r = spectral_rolloff(x, p);
    EXPECT_GE(r, prev);
    prev = r;
  }
  AudioBuffer y = x;
  for (double& v : y.channel(0)) v *= 7.3;
  EXPECT_EQ(spectral_rolloff(x), spectral_rolloff(y));
}

TEST(Rolloff, Normalization) {
  EXPECT_EQ(normalize_rolloff(0.0, 44100), 0.0);
  EXPECT_DOUBLE_EQ(normalize_rolloff(11025.0, 44100), 0.5);
  EXPECT_EQ(normalize_rolloff(22050.0, 44100), 1.0 - 1e-6);
  EXPECT_THROW(normalize_rolloff(-1.0, 44100), std::invalid_argument);
  EXPECT_THROW(normalize_rolloff(22051.0, 44100), std::invalid_argument);
  EXPECT_DOUBLE_EQ(denormalize_rolloff(0.5, 44100), 11025.0);
}

TEST(Iir, ButterworthMinus3dbAtCutoff) {
  for (int order = 2; order <= 10; ++order) {
    for (double fc : {2000.0, 4000.0, 8000.0, 16000.0}) {
      const auto sos = design_lowpass({FilterFamily::kButterworth, order, fc}, 44100);
      EXPECT_NEAR(db(std::abs(sos.response(fc, 44100))), db(1.0 / std::sqrt(2.0)), 0.1)
          << "order " << order << " fc " << fc;
    }
  }
}

TEST(Iir, ButterworthAnalogPrototypeClosedForm) {
  const Zpk z = analog_prototype({FilterFamily::kButterworth, 4, 1000.0});
  const double mag2 = std::norm(z.response({0.0, 2.0}));
  EXPECT_NEAR(mag2, 1.0 / (1.0 + std::pow(2.0, 8)), 1e-12);
  EXPECT_NEAR(10.0 * std::log10(mag2), -24.1, 0.05);
  for (const auto& p : z.poles) EXPECT_NEAR(std::abs(p), 1.0, 1e-12);
}

TEST(Iir, Chebyshev1EquirippleInPassband) {
  FilterSpec spec{FilterFamily::kChebyshev1, 6, 1000.0};
  spec.passband_ripple_db = 1.0;
  const Zpk z = analog_prototype(spec);
  double lo = 0.0, hi = -100.0;
  for (int i = 0; i <= 2000; ++i) {
    const double w = i / 2000.0;
    const double g = db(std::abs(z.response({0.0, w})));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  EXPECT_GE(lo, -1.0 - 1e-9);
  EXPECT_LE(hi, 1e-9);
  EXPECT_NEAR(lo, -1.0, 1e-3);
  EXPECT_NEAR(hi, 0.0, 1e-3);
}

TEST(Iir, BesselAndEllipticCutoffConventions) {
  for (int order = 2; order <= 10; ++order) {
    const Zpk b = analog_prototype({FilterFamily::kBessel, order, 1000.0});
    EXPECT_NEAR(db(std::abs(b.response({0.0, 1.0}))), -3.0103, 1e-3);
    FilterSpec e{FilterFamily::kElliptic, order, 1000.0};
    const Zpk ez = analog_prototype(e);
    EXPECT_NEAR(db(std::abs(ez.response({0.0, 1.0}))), -1.0, 1e-3);
  }
}

TEST(Iir, EllipticStopbandReachesAttenuation) {
  FilterSpec e{FilterFamily::kElliptic, 6, 4000.0};
  const auto sos = design_lowpass(e, 44100);
  double worst = -1e9;
  for (double f = 8000.0; f < 22050.0; f += 25.0) {
    worst = std::max(worst, db(std::abs(sos.response(f, 44100))));
  }
  EXPECT_LE(worst, -60.0 + 1e-6);
}

TEST(Iir, AllCascadesStable) {
  for (FilterFamily fam : kAllFamilies) {
    for (int order = 2; order <= 10; ++order) {
      for (double fc : {2000.0, 4000.0, 8000.0, 16000.0}) {
        const auto sos = design_lowpass({fam, order, fc}, 44100);
        EXPECT_LT(sos.max_pole_radius(), 1.0 - 1e-9)
            << family_name(fam) << " " << order << " " << fc;
        for (const auto& s : sos.sections) EXPECT_EQ(s.a0, 1.0);
        EXPECT_NEAR(std::abs(sos.response(0.0, 44100)),
                    fam == FilterFamily::kChebyshev1 || fam == FilterFamily::kElliptic
                        ? (order % 2 == 0 ? std::pow(10.0, -1.0 / 20.0) : 1.0)
                        : 1.0,
                    1e-6);
      }
    }
  }
}

TEST(Iir, SpecValidation) {
  EXPECT_THROW(design_lowpass({FilterFamily::kButterworth, 4, 22050.0}, 44100),
               std::invalid_argument);
  EXPECT_THROW(design_lowpass({FilterFamily::kButterworth, 1, 1000.0}, 44100),
               std::invalid_argument);
  EXPECT_THROW(design_lowpass({FilterFamily::kButterworth, 11, 1000.0}, 44100),
               std::invalid_argument);
  FilterSpec bad{FilterFamily::kChebyshev1, 4, 1000.0};
  bad.passband_ripple_db = 0.0;
  EXPECT_THROW(design_lowpass(bad, 44100), std::invalid_argument);
  EXPECT_EQ(parse_family("elliptic"), FilterFamily::kElliptic);
  EXPECT_THROW(parse_family("foo"), std::invalid_argument);
}

TEST(ApplyFilter, ZeroIdentityAndStopband) {
  const auto sos = design_lowpass({FilterFamily::kButterworth, 8, 4000.0}, 44100);
  const auto zero = apply_filter(AudioBuffer(1, 1000, 44100), sos);
  for (double v : zero.channel(0)) EXPECT_EQ(v, 0.0);

  SosCascade identity;
  identity.sections.push_back({});
  AudioBuffer imp(1, 64, 44100);
  imp.channel(0)[0] = 1.0;
  const auto out = apply_filter(imp, identity);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(out.channel(0)[i], i == 0 ? 1.0 : 0.0);

  const auto x = sine(16000.0, 44100, 44100);
  const auto y = apply_filter(x, sos);
  ASSERT_EQ(y.num_samples(), x.num_samples());
  // Skip the onset transient.
  EXPECT_LT(rms(y.channel(0).subspan(2000)), 1e-3 * rms(x.channel(0).subspan(2000)));
}

TEST(ApplyFilter, Linear) {
  const auto sos = design_lowpass({FilterFamily::kElliptic, 7, 5000.0}, 44100);
  const auto a = noise(3000, 44100, 7), b = noise(3000, 44100, 8);
  AudioBuffer mix(1, 3000, 44100);
  for (std::size_t i = 0; i < 3000; ++i) mix.channel(0)[i] = 2.0 * a.channel(0)[i] - 0.5 * b.channel(0)[i];
  const auto fa = apply_filter(a, sos), fb = apply_filter(b, sos), fm = apply_filter(mix, sos);
  for (std::size_t i = 0; i < 3000; ++i) {
    EXPECT_NEAR(fm.channel(0)[i], 2.0 * fa.channel(0)[i] - 0.5 * fb.channel(0)[i], 1e-9);
  }
}

TEST(Resample, IdentityDcAndRoundTrip) {
  const auto x = noise(5000, 44100, 9);
  const auto same = resample(x, 44100);
  for (std::size_t i = 0; i < 5000; ++i) EXPECT_EQ(same.channel(0)[i], x.channel(0)[i]);

  const auto dc = AudioBuffer::mono(std::vector<double>(8000, 0.7), 44100);
  const auto d2 = resample(dc, 22050);
  EXPECT_EQ(d2.num_samples(), 4000u);
  for (std::size_t i = 200; i + 200 < d2.num_samples(); ++i) EXPECT_NEAR(d2.channel(0)[i], 0.7, 1e-4);

  const auto s = sine(1000.0, 44100, 44100, 0.8);
  const auto back = resample(resample(s, 22050), 44100);
  ASSERT_EQ(back.num_samples(), s.num_samples());
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 2000; i + 2000 < s.num_samples(); ++i) {
    sig += s.channel(0)[i] * s.channel(0)[i];
    const double e = back.channel(0)[i] - s.channel(0)[i];
    err += e * e;
  }
  EXPECT_GT(10.0 * std::log10(sig / err), 60.0);
  EXPECT_EQ(resample(noise(1001, 44100, 1), 16000).num_samples(),
            static_cast<std::size_t>(std::llround(1001.0 * 16000 / 44100)));
}

TEST(LfReplace, IdentityAndNyquist) {
  const auto x = noise(7000, 44100, 10), g = noise(7000, 44100, 11);
  const auto same = low_frequency_replacement(x, x, 4000.0);
  for (std::size_t i = 0; i < 7000; ++i) EXPECT_NEAR(same.channel(0)[i], x.channel(0)[i], 1e-6);
  const auto full = low_frequency_replacement(g, x, 22050.0);
  for (std::size_t i = 0; i < 7000; ++i) EXPECT_NEAR(full.channel(0)[i], x.channel(0)[i], 1e-6);
}

TEST(LfReplace, BandEnergySplitAndIdempotence) {
  const auto in = apply_filter(noise(16384, 44100, 12),
                               design_lowpass({FilterFamily::kElliptic, 8, 3500.0}, 44100));
  const auto gen = noise(16384, 44100, 13);
  const auto out = low_frequency_replacement(gen, in, 4000.0);
  const auto [in_lo, in_hi] = band_energy(in.channel(0), 44100, 4000.0);
  const auto [gen_lo, gen_hi] = band_energy(gen.channel(0), 44100, 4000.0);
  const auto [out_lo, out_hi] = band_energy(out.channel(0), 44100, 4000.0);
  (void)in_hi;
  (void)gen_lo;
  EXPECT_NEAR(10.0 * std::log10(out_lo / in_lo), 0.0, 0.1);
  EXPECT_NEAR(10.0 * std::log10(out_hi / gen_hi), 0.0, 0.1);

  const auto twice = low_frequency_replacement(out, in, 4000.0);
  for (std::size_t i = 0; i < out.num_samples(); ++i) {
    EXPECT_NEAR(twice.channel(0)[i], out.channel(0)[i], 1e-9);
  }
}

TEST(LfReplace, Mismatches) {
  EXPECT_THROW(low_frequency_replacement(noise(100, 44100, 1), noise(101, 44100, 1), 1000.0),
               std::invalid_argument);
  EXPECT_THROW(low_frequency_replacement(noise(100, 44100, 1), noise(100, 22050, 1), 1000.0),
               std::invalid_argument);
}

TEST(Mel, ScaleAndPseudoInverse) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(5123.0)), 5123.0, 1e-9);
  const MelFilterbank fb(64, 2048, 44100);
  EXPECT_EQ(fb.bands(), 64u);
  EXPECT_EQ(fb.bins(), 1025u);
  // W * pinv(W) = I.
  const Matrix wp = matmul(fb.weights(), fb.pseudo_inverse());
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(wp(i, j), i == j ? 1.0 : 0.0, 1e-8);
  }
  for (std::size_t b = 1; b < 64; ++b) EXPECT_GT(fb.center_hz(b), fb.center_hz(b - 1));
  EXPECT_EQ(fb.first_band_at_or_above(0.0), 0u);
  EXPECT_EQ(fb.first_band_at_or_above(1e9), 64u);
}
