#include "sagasr/dsp/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace sagasr::dsp {
namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
// Plans are created once per length and kept for the process lifetime.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const PlanPair& plans_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const int len = static_cast<int>(n);
  std::vector<double> re(n);
  std::vector<std::complex<double>> cx(n / 2 + 1);
  auto* cptr = reinterpret_cast<fftw_complex*>(cx.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(len, re.data(), cptr, flags);
  p.inverse = fftw_plan_dft_c2r_1d(len, cptr, re.data(),
                                   flags | FFTW_DESTROY_INPUT);
  if (p.forward == nullptr || p.inverse == nullptr) {
    throw std::runtime_error("fft: planning failed");
  }
  return cache.emplace(n, p).first->second;
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = in.size();
  if (n == 0) throw std::invalid_argument("fft: empty input");
  if (out.size() != n / 2 + 1) throw std::invalid_argument("fft: bad output size");
  const auto& p = plans_for(n);
  // r2c does not modify its input, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) throw std::invalid_argument("fft: empty output");
  if (in.size() != n / 2 + 1) throw std::invalid_argument("fft: bad input size");
  const auto& p = plans_for(n);
  // c2r destroys its input, so work on a copy.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse,
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
}

std::vector<std::complex<double>> rfft(std::span<const double> in) {
  std::vector<std::complex<double>> out(in.size() / 2 + 1);
  rfft(in, out);
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> in,
                          std::size_t n) {
  std::vector<double> out(n);
  irfft(in, out);
  return out;
}

}  // namespace sagasr::dsp
