#include "rotopend/noise_path.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rotopend/fft.hpp"
#include "rotopend/rng.hpp"

namespace rotopend {

namespace {
constexpr double kDomainSlack = 1e-9;  // relative to dt, absorbs roundoff at the ends
}

NoisePath::NoisePath(double t_start, double dt, std::vector<double> values,
                     std::uint64_t seed, std::string kernel_id)
    : t_start_(t_start),
      dt_(dt),
      values_(std::make_shared<const std::vector<double>>(std::move(values))),
      seed_(seed),
      kernel_id_(std::move(kernel_id)) {
    if (dt_ <= 0) throw std::invalid_argument("NoisePath: dt must be positive");
    if (values_->size() < 2) throw std::invalid_argument("NoisePath: need at least 2 nodes");
    if (!std::isfinite(t_start_)) throw std::invalid_argument("NoisePath: non-finite t_start");
}

NoisePath NoisePath::sample(const Kernel& kernel, double t_start, double dt,
                            std::size_t n, std::uint64_t seed, SampleReport* report) {
    if (dt <= 0) throw std::invalid_argument("sample: dt must be positive");
    if (n < 2) throw std::invalid_argument("sample: need n >= 2");

    // Pad the embedding past the kernel support so the wrapped circulant row
    // stays a valid covariance (keeps eigenvalues nonnegative in practice).
    const std::size_t pad = static_cast<std::size_t>(std::ceil(kernel.support_lag() / dt)) + 1;
    const std::size_t m = fft::next_pow2(2 * (n - 1 + pad));

    std::vector<std::complex<double>> c(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = std::min(j, m - j);
        c[j] = kernel(static_cast<double>(lag) * dt);
    }
    fft::forward(c);  // eigenvalues of the circulant

    double max_ev = 0.0, min_ev = 0.0;
    for (const auto& z : c) {
        max_ev = std::max(max_ev, z.real());
        min_ev = std::min(min_ev, z.real());
    }
    if (min_ev < -1e-10 * max_ev) {
        std::ostringstream msg;
        msg << "circulant embedding failed: eigenvalue " << min_ev << " below -1e-10 * "
            << max_ev << " (kernel " << kernel.id << ", dt " << dt << ")";
        throw std::runtime_error(msg.str());
    }
    int clipped = 0;
    std::vector<double> sqrt_ev(m);
    for (std::size_t j = 0; j < m; ++j) {
        double ev = c[j].real();
        if (ev < 0) {
            ev = 0;
            ++clipped;
        }
        sqrt_ev[j] = std::sqrt(ev);
    }
    if (report) {
        report->clipped_eigenvalues = clipped;
        report->min_eigenvalue_ratio = max_ev > 0 ? min_ev / max_ev : 0.0;
        report->embedding_size = m;
    }

    // y = m^{-1/2} F^H (sqrt(lambda) .* eps), eps complex standard normal;
    // Re(y) is a real Gaussian vector with the Toeplitz covariance.
    GaussianSource gauss(seed);
    std::vector<std::complex<double>> z(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double u = gauss.next();
        const double v = gauss.next();
        z[j] = sqrt_ev[j] * std::complex<double>(u, v);
    }
    fft::backward(z);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = z[j].real() * scale;

    return NoisePath(t_start, dt, std::move(values), seed, kernel.id);
}

NoisePath NoisePath::from_function(const std::function<double(double)>& f,
                                   double t_start, double dt, std::size_t n,
                                   const std::string& id) {
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j)
        values[j] = f(t_start + dt * static_cast<double>(j));
    return NoisePath(t_start, dt, std::move(values), 0, id);
}

bool NoisePath::contains(double t) const {
    const double slack = kDomainSlack * dt_;
    return t >= t_start_ - slack && t <= t_end() + slack;
}

double NoisePath::evaluate(double t) const {
    if (!contains(t)) {
        std::ostringstream msg;
        msg << "noise path evaluated at t=" << t << " outside domain [" << t_start_
            << ", " << t_end() << "]";
        throw std::out_of_range(msg.str());
    }
    double x = (t - t_start_) / dt_;
    const auto& v = *values_;
    if (x <= 0) return v.front();
    if (x >= static_cast<double>(v.size() - 1)) return v.back();
    const auto i = static_cast<std::size_t>(x);
    const double theta = x - static_cast<double>(i);
    return v[i] + theta * (v[i + 1] - v[i]);
}

NoisePath NoisePath::shifted(double t0) const {
    if (!std::isfinite(t0)) throw std::invalid_argument("shift by non-finite time");
    NoisePath out = *this;
    out.t_start_ = t_start_ - t0;
    return out;
}

std::size_t NoisePath::node_at_or_after(double t) const {
    const double x = (t - t_start_) / dt_ - kDomainSlack;
    if (x <= 0) return 0;
    const double c = std::ceil(x);
    if (c >= static_cast<double>(size() - 1)) return size() - 1;
    return static_cast<std::size_t>(c);
}

std::size_t NoisePath::node_at_or_before(double t) const {
    const double x = (t - t_start_) / dt_ + kDomainSlack;
    if (x <= 0) return 0;
    const double f = std::floor(x);
    if (f >= static_cast<double>(size() - 1)) return size() - 1;
    return static_cast<std::size_t>(f);
}

void NoisePath::write_csv(const std::string& filename) const {
    std::FILE* f = std::fopen(filename.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + filename + " for writing");
    std::fprintf(f, "%.17g,%.17g,%zu,%llu,%s\n", t_start_, dt_, size(),
                 static_cast<unsigned long long>(seed_), kernel_id_.c_str());
    for (double v : *values_) std::fprintf(f, "%.17g\n", v);
    std::fclose(f);
}

NoisePath NoisePath::read_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open " + filename);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty path file " + filename);
    std::istringstream hs(header);
    std::string field;
    double t_start, dt;
    std::size_t n;
    unsigned long long seed;
    std::string kernel_id;
    if (!std::getline(hs, field, ',')) throw std::runtime_error("bad path header");
    t_start = std::stod(field);
    if (!std::getline(hs, field, ',')) throw std::runtime_error("bad path header");
    dt = std::stod(field);
    if (!std::getline(hs, field, ',')) throw std::runtime_error("bad path header");
    n = std::stoull(field);
    if (!std::getline(hs, field, ',')) throw std::runtime_error("bad path header");
    seed = std::stoull(field);
    if (!std::getline(hs, kernel_id)) throw std::runtime_error("bad path header");

    std::vector<double> values;
    values.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        values.push_back(std::stod(line));
    }
    if (values.size() != n)
        throw std::runtime_error("path file " + filename + " value count mismatch");
    return NoisePath(t_start, dt, std::move(values), seed, kernel_id);
}

}  // namespace rotopend
