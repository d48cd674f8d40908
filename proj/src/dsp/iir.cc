#include "sagasr/dsp/iir.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sagasr::dsp {
namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr int kLandenSteps = 7;

// ---------------------------------------------------------------------------
// Jacobi elliptic helpers via descending Landen transformations.

std::vector<double> landen(double k) {
  std::vector<double> v;
  v.reserve(kLandenSteps);
  if (k == 0.0 || k == 1.0) {
    v.assign(kLandenSteps, k);
    return v;
  }
  for (int n = 0; n < kLandenSteps; ++n) {
    k = k / (1.0 + std::sqrt(1.0 - k * k));
    k *= k;
    v.push_back(k);
  }
  return v;
}

double ellipk(double k) {
  double prod = 1.0;
  for (double vn : landen(k)) prod *= 1.0 + vn;
  return kPi / 2.0 * prod;
}

// cd(uK, k) for complex u.
cd cde(cd u, double k) {
  const auto v = landen(k);
  cd w = std::cos(u * kPi / 2.0);
  for (int n = kLandenSteps - 1; n >= 0; --n) {
    w = (1.0 + v[n]) * w / (1.0 + v[n] * w * w);
  }
  return w;
}

// sn(uK, k) for complex u.
cd sne(cd u, double k) {
  const auto v = landen(k);
  cd w = std::sin(u * kPi / 2.0);
  for (int n = kLandenSteps - 1; n >= 0; --n) {
    w = (1.0 + v[n]) * w / (1.0 + v[n] * w * w);
  }
  return w;
}

double srem(double x, double y) { return x - y * std::round(x / y); }

// Inverse of cde: returns u such that cd(uK, k) = w.
cd acde(cd w, double k) {
  const auto v = landen(k);
  for (int n = 0; n < kLandenSteps; ++n) {
    const double v1 = n == 0 ? k : v[n - 1];
    w = w / (1.0 + std::sqrt(1.0 - w * w * (v1 * v1))) * 2.0 / (1.0 + v[n]);
  }
  cd u = 2.0 / kPi * std::acos(w);
  const double big_k = ellipk(k);
  const double big_kp = ellipk(std::sqrt(1.0 - k * k));
  const double ratio = big_kp / big_k;
  return {srem(u.real(), 4.0), srem(u.imag(), 2.0 * ratio)};
}

cd asne(cd w, double k) { return 1.0 - acde(w, k); }

// Solves the degree equation N K'/K = K1'/K1 for k given k1.
double ellipdeg(int order, double k1) {
  const int half = order / 2;
  const double k1p = std::sqrt(1.0 - k1 * k1);
  double prod = 1.0;
  for (int i = 1; i <= half; ++i) {
    const double ui = (2.0 * i - 1.0) / order;
    prod *= sne(cd(ui, 0.0), k1p).real();
  }
  const double kp = std::pow(k1p, order) * std::pow(prod, 4);
  return std::sqrt(1.0 - kp * kp);
}

// ---------------------------------------------------------------------------
// Analog prototypes.

Zpk butterworth(int n) {
  Zpk z;
  for (int k = 0; k < n; ++k) {
    const double theta = kPi * (2.0 * k + n + 1.0) / (2.0 * n);
    z.poles.push_back(std::polar(1.0, theta));
  }
  z.gain = 1.0;
  return z;
}

Zpk chebyshev1(int n, double ripple_db) {
  const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / n;
  Zpk z;
  cd prod = 1.0;
  for (int k = 0; k < n; ++k) {
    const double theta = kPi * (2.0 * k + 1.0) / (2.0 * n);
    const cd p(-std::sinh(mu) * std::sin(theta), std::cosh(mu) * std::cos(theta));
    z.poles.push_back(p);
    prod *= -p;
  }
  z.gain = prod.real();
  if (n % 2 == 0) z.gain /= std::sqrt(1.0 + eps * eps);
  return z;
}

// Roots of a real polynomial (coefficients in ascending powers) by
// Durand-Kerner iteration; adequate for the degrees used here (<= 10).
std::vector<cd> poly_roots(const std::vector<double>& ascending) {
  const int n = static_cast<int>(ascending.size()) - 1;
  const double lead = ascending.back();
  auto eval = [&](cd x) {
    cd acc = 0.0;
    for (int i = n; i >= 0; --i) acc = acc * x + ascending[i] / lead;
    return acc;
  };
  // Initial guesses on a circle sized by the root magnitude bound.
  const double radius =
      std::pow(std::abs(ascending.front() / lead), 1.0 / n);
  std::vector<cd> roots(n);
  for (int i = 0; i < n; ++i) {
    roots[i] = std::polar(radius, 2.0 * kPi * i / n + 0.4);
  }
  for (int iter = 0; iter < 2000; ++iter) {
    double max_step = 0.0;
    for (int i = 0; i < n; ++i) {
      cd denom = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) denom *= roots[i] - roots[j];
      }
      const cd step = eval(roots[i]) / denom;
      roots[i] -= step;
      max_step = std::max(max_step, std::abs(step) / std::max(1.0, std::abs(roots[i])));
    }
    if (max_step < 1e-15) break;
  }
  return roots;
}

Zpk bessel(int n) {
  // Reverse Bessel polynomial: a_k = (2n-k)! / (2^(n-k) k! (n-k)!).
  std::vector<double> coeffs(n + 1);
  for (int k = 0; k <= n; ++k) {
    coeffs[k] = std::exp(std::lgamma(2.0 * n - k + 1) - (n - k) * std::log(2.0) -
                         std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
    coeffs[k] = std::round(coeffs[k]);
  }
  Zpk z;
  z.poles = poly_roots(coeffs);
  for (auto& p : z.poles) {
    if (std::abs(p.imag()) < 1e-12 * std::abs(p)) p = cd(p.real(), 0.0);
  }
  auto dc_normalized = [&](double w) {
    cd h = 1.0;
    for (const auto& p : z.poles) h *= -p / (cd(0.0, w) - p);
    return std::norm(h);
  };
  // Magnitude-matched normalization: find the -3 dB point and move it to 1.
  double lo = 1e-3, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (dc_normalized(mid) > 0.5) lo = mid; else hi = mid;
  }
  const double wc = std::sqrt(lo * hi);
  cd prod = 1.0;
  for (auto& p : z.poles) {
    p /= wc;
    prod *= -p;
  }
  z.gain = prod.real();
  return z;
}

Zpk elliptic(int n, double ripple_db, double atten_db) {
  const double ep = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double es = std::sqrt(std::pow(10.0, atten_db / 10.0) - 1.0);
  const double k1 = ep / es;
  const double k = ellipdeg(n, k1);
  const int half = n / 2;
  const cd j(0.0, 1.0);

  const cd v0 = -j * asne(j / ep, k1) / static_cast<double>(n);
  Zpk z;
  for (int i = 1; i <= half; ++i) {
    const double ui = (2.0 * i - 1.0) / n;
    const cd zeta = cde(cd(ui, 0.0), k);
    const cd zero = j / (k * zeta);
    z.zeros.push_back(zero);
    z.zeros.push_back(std::conj(zero));
    const cd pole = j * cde(ui - j * v0, k);
    z.poles.push_back(pole);
    z.poles.push_back(std::conj(pole));
  }
  if (n % 2 == 1) {
    const cd p0 = j * sne(j * v0, k);
    z.poles.push_back(cd(p0.real(), 0.0));
  }
  // Set the gain from the DC value: 1 for odd order, 1/sqrt(1+eps^2) even.
  z.gain = 1.0;
  const double dc = std::abs(z.response(0.0));
  const double target = n % 2 == 1 ? 1.0 : 1.0 / std::sqrt(1.0 + ep * ep);
  z.gain = target / dc;
  return z;
}

// ---------------------------------------------------------------------------
// SOS assembly.

Biquad section_from_roots(cd z1, cd z2, cd p1, cd p2) {
  Biquad b;
  b.b0 = 1.0;
  b.b1 = -(z1 + z2).real();
  b.b2 = (z1 * z2).real();
  b.a0 = 1.0;
  b.a1 = -(p1 + p2).real();
  b.a2 = (p1 * p2).real();
  return b;
}

std::complex<double> biquad_response(const Biquad& s, cd zinv) {
  const cd num = s.b0 + s.b1 * zinv + s.b2 * zinv * zinv;
  const cd den = s.a0 + s.a1 * zinv + s.a2 * zinv * zinv;
  return num / den;
}

bool is_real(cd x) { return std::abs(x.imag()) <= 1e-10 * std::max(1.0, std::abs(x)); }

}  // namespace

std::string_view family_name(FilterFamily f) {
  switch (f) {
    case FilterFamily::kButterworth: return "butterworth";
    case FilterFamily::kChebyshev1: return "chebyshev1";
    case FilterFamily::kBessel: return "bessel";
    case FilterFamily::kElliptic: return "elliptic";
  }
  return "unknown";
}

FilterFamily parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown filter family: " + std::string(name));
}

void FilterSpec::validate(int sample_rate) const {
  if (order < 2 || order > 10) {
    throw std::invalid_argument("filter: order must be within [2, 10]");
  }
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate / 2.0) {
    throw std::invalid_argument("filter: cutoff must satisfy 0 < cutoff < Nyquist");
  }
  const bool needs_ripple = family == FilterFamily::kChebyshev1 ||
                            family == FilterFamily::kElliptic;
  if (needs_ripple && !(passband_ripple_db > 0.0)) {
    throw std::invalid_argument("filter: passband ripple must be positive");
  }
  if (family == FilterFamily::kElliptic &&
      !(stopband_atten_db > passband_ripple_db)) {
    throw std::invalid_argument("filter: stopband attenuation must exceed ripple");
  }
}

std::complex<double> Zpk::response(std::complex<double> s) const {
  cd h = gain;
  for (const auto& z : zeros) h *= s - z;
  for (const auto& p : poles) h /= s - p;
  return h;
}

Zpk analog_prototype(const FilterSpec& spec) {
  if (spec.order < 2 || spec.order > 10) {
    throw std::invalid_argument("filter: order must be within [2, 10]");
  }
  switch (spec.family) {
    case FilterFamily::kButterworth: return butterworth(spec.order);
    case FilterFamily::kChebyshev1:
      return chebyshev1(spec.order, spec.passband_ripple_db);
    case FilterFamily::kBessel: return bessel(spec.order);
    case FilterFamily::kElliptic:
      return elliptic(spec.order, spec.passband_ripple_db, spec.stopband_atten_db);
  }
  throw std::invalid_argument("filter: unknown family");
}

std::complex<double> SosCascade::response(double freq_hz, int sample_rate) const {
  const cd zinv = std::polar(1.0, -2.0 * kPi * freq_hz / sample_rate);
  cd h = 1.0;
  for (const auto& s : sections) h *= biquad_response(s, zinv);
  return h;
}

double SosCascade::max_pole_radius() const {
  double r = 0.0;
  for (const auto& s : sections) {
    // Roots of z^2 + (a1/a0) z + (a2/a0).
    const double a1 = s.a1 / s.a0;
    const double a2 = s.a2 / s.a0;
    const cd disc = std::sqrt(cd(a1 * a1 - 4.0 * a2, 0.0));
    r = std::max({r, std::abs((-a1 + disc) / 2.0), std::abs((-a1 - disc) / 2.0)});
  }
  return r;
}

SosCascade design_lowpass(const FilterSpec& spec, int sample_rate) {
  spec.validate(sample_rate);
  const Zpk proto = analog_prototype(spec);

  // Pre-warp so the digital cutoff lands exactly on spec.cutoff_hz.
  const double fs2 = 2.0 * sample_rate;
  const double warped = fs2 * std::tan(kPi * spec.cutoff_hz / sample_rate);
  auto bilinear = [&](cd s) { return (fs2 + s * warped) / (fs2 - s * warped); };

  std::vector<cd> zeros, poles;
  for (const auto& z : proto.zeros) zeros.push_back(bilinear(z));
  for (const auto& p : proto.poles) poles.push_back(bilinear(p));
  while (zeros.size() < poles.size()) zeros.push_back(-1.0);

  // Split into conjugate pairs (upper half plane representative) and reals.
  std::vector<cd> pole_pairs, real_poles, zero_pairs, real_zeros;
  for (const auto& p : poles) {
    if (is_real(p)) real_poles.push_back(p.real());
    else if (p.imag() > 0) pole_pairs.push_back(p);
  }
  for (const auto& z : zeros) {
    if (is_real(z)) real_zeros.push_back(z.real());
    else if (z.imag() > 0) zero_pairs.push_back(z);
  }
  // Poles closest to the unit circle get the nearest zeros.
  std::sort(pole_pairs.begin(), pole_pairs.end(),
            [](cd a, cd b) { return std::abs(a) > std::abs(b); });

  SosCascade sos;
  for (const auto& p : pole_pairs) {
    cd z1, z2;
    if (!zero_pairs.empty()) {
      auto it = std::min_element(zero_pairs.begin(), zero_pairs.end(),
                                 [&](cd a, cd b) { return std::abs(a - p) < std::abs(b - p); });
      z1 = *it;
      z2 = std::conj(*it);
      zero_pairs.erase(it);
    } else if (real_zeros.size() >= 2) {
      z1 = real_zeros.back(); real_zeros.pop_back();
      z2 = real_zeros.back(); real_zeros.pop_back();
    } else {
      throw std::logic_error("filter: zero/pole pairing failed");
    }
    sos.sections.push_back(section_from_roots(z1, z2, p, std::conj(p)));
  }
  // Remaining real poles pair up (two per section) or form a first-order one.
  for (std::size_t i = 0; i < real_poles.size(); i += 2) {
    const bool pair = i + 1 < real_poles.size();
    Biquad b;
    const cd z1 = real_zeros.empty() ? cd(-1.0) : real_zeros.back();
    if (!real_zeros.empty()) real_zeros.pop_back();
    if (pair) {
      const cd z2 = real_zeros.empty() ? cd(-1.0) : real_zeros.back();
      if (!real_zeros.empty()) real_zeros.pop_back();
      b = section_from_roots(z1, z2, real_poles[i], real_poles[i + 1]);
    } else {
      b.b0 = 1.0; b.b1 = -z1.real(); b.b2 = 0.0;
      b.a0 = 1.0; b.a1 = -real_poles[i].real(); b.a2 = 0.0;
    }
    sos.sections.push_back(b);
  }

  // Match the prototype's DC gain.
  const double target_dc = std::abs(proto.response(0.0));
  const double dc = std::abs(sos.response(0.0, sample_rate));
  const double g = target_dc / dc;
  sos.sections.front().b0 *= g;
  sos.sections.front().b1 *= g;
  sos.sections.front().b2 *= g;

  if (!(sos.max_pole_radius() < 1.0)) {
    throw std::logic_error("filter: designed cascade is unstable");
  }
  return sos;
}

void apply_filter_inplace(std::span<double> x, const SosCascade& sos) {
  for (const auto& s : sos.sections) {
    const double b0 = s.b0 / s.a0, b1 = s.b1 / s.a0, b2 = s.b2 / s.a0;
    const double a1 = s.a1 / s.a0, a2 = s.a2 / s.a0;
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
}

AudioBuffer apply_filter(const AudioBuffer& audio, const SosCascade& sos) {
  AudioBuffer out = audio;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    apply_filter_inplace(out.channel(c), sos);
  }
  return out;
}

}  // namespace sagasr::dsp
