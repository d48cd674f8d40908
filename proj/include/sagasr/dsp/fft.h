#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sagasr::dsp {

// Real-to-half-complex DFT of length in.size(); out has n/2+1 bins.
// Unnormalized: X[k] = sum_n x[n] e^{-2 pi i k n / N}.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);

// Inverse of rfft including the 1/N factor. out.size() is the signal length.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

std::vector<std::complex<double>> rfft(std::span<const double> in);
std::vector<double> irfft(std::span<const std::complex<double>> in,
                          std::size_t n);

}  // namespace sagasr::dsp
