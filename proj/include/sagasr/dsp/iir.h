#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "sagasr/audio.h"

namespace sagasr::dsp {

enum class FilterFamily { kButterworth, kChebyshev1, kBessel, kElliptic };

inline constexpr FilterFamily kAllFamilies[] = {
    FilterFamily::kButterworth, FilterFamily::kChebyshev1,
    FilterFamily::kBessel, FilterFamily::kElliptic};

std::string_view family_name(FilterFamily f);
FilterFamily parse_family(std::string_view name);

struct FilterSpec {
  FilterFamily family = FilterFamily::kButterworth;
  int order = 4;
  double cutoff_hz = 4000.0;
  // Chebyshev1 and Elliptic only.
  double passband_ripple_db = 1.0;
  // Elliptic only.
  double stopband_atten_db = 60.0;

  // Throws std::invalid_argument when the spec cannot be realized at
  // sample_rate.
  void validate(int sample_rate) const;
};

// Analog low-pass prototype in zero/pole/gain form, normalized so the
// family's cutoff sits at 1 rad/s: -3 dB for Butterworth and Bessel, the
// passband edge (-ripple dB) for Chebyshev1 and Elliptic.
struct Zpk {
  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;

  std::complex<double> response(std::complex<double> s) const;
};

Zpk analog_prototype(const FilterSpec& spec);

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a0 = 1.0, a1 = 0.0, a2 = 0.0;
};

struct SosCascade {
  std::vector<Biquad> sections;

  // Complex frequency response at freq_hz.
  std::complex<double> response(double freq_hz, int sample_rate) const;
  // Largest pole magnitude over all sections.
  double max_pole_radius() const;
};

// Pre-warped bilinear transform of the analog prototype, paired into
// second-order sections with a0 = 1.
SosCascade design_lowpass(const FilterSpec& spec, int sample_rate);

// Causal direct-form-II-transposed filtering, per channel, zero initial state.
AudioBuffer apply_filter(const AudioBuffer& audio, const SosCascade& sos);
void apply_filter_inplace(std::span<double> x, const SosCascade& sos);

}  // namespace sagasr::dsp
