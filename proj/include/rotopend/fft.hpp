#ifndef ROTOPEND_FFT_HPP
#define ROTOPEND_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace rotopend::fft {

std::size_t next_pow2(std::size_t n);

// Unnormalized forward / backward complex DFT (FFTW conventions:
// forward e^{-2 pi i jk/n}, backward e^{+2 pi i jk/n}, no 1/n factor).
void forward(std::vector<std::complex<double>>& data);
void backward(std::vector<std::complex<double>>& data);

// Cross-correlation out[j] = sum_k kernel[k] * signal[j + k] for
// j = 0 .. n_out-1. Requires signal.size() >= kernel.size() + n_out - 1.
std::vector<double> correlate(const std::vector<double>& kernel,
                              const std::vector<double>& signal,
                              std::size_t n_out);

}  // namespace rotopend::fft

#endif
