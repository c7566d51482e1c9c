#include "rotopend/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace rotopend::fft {

namespace {
// FFTW plan creation is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void transform(std::vector<std::complex<double>>& data, int sign) {
    const auto n = data.size();
    if (n == 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}
}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void forward(std::vector<std::complex<double>>& data) { transform(data, FFTW_FORWARD); }
void backward(std::vector<std::complex<double>>& data) { transform(data, FFTW_BACKWARD); }

std::vector<double> correlate(const std::vector<double>& kernel,
                              const std::vector<double>& signal,
                              std::size_t n_out) {
    const std::size_t nk = kernel.size();
    if (nk == 0 || n_out == 0) return std::vector<double>(n_out, 0.0);
    if (signal.size() < nk + n_out - 1)
        throw std::invalid_argument("correlate: signal shorter than kernel + output span");

    const std::size_t m = next_pow2(signal.size() + nk);
    std::vector<std::complex<double>> a(m), b(m);
    // Correlation as convolution with the reversed kernel.
    for (std::size_t k = 0; k < nk; ++k) a[k] = kernel[nk - 1 - k];
    for (std::size_t j = 0; j < signal.size(); ++j) b[j] = signal[j];
    forward(a);
    forward(b);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    backward(a);
    const double scale = 1.0 / static_cast<double>(m);
    std::vector<double> out(n_out);
    for (std::size_t j = 0; j < n_out; ++j) out[j] = a[j + nk - 1].real() * scale;
    return out;
}

}  // namespace rotopend::fft
