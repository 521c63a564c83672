#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace lplab::fft {

// Unnormalized DFT pair (FFTW convention):
//   forward: out[m] = sum_j in[j] exp(-2*pi*i*j*m/N)
//   inverse: out[j] = sum_m in[m] exp(+2*pi*i*j*m/N)
// inverse(forward(f)) == N * f. Plans are cached per thread and size.
void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

}  // namespace lplab::fft
