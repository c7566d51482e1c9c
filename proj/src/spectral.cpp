#include "rotopend/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rotopend/rng.hpp"

namespace rotopend {

namespace {

// Simpson weights (1,4,2,...,4,1) * step/3 over n+1 nodes, n even.
std::vector<double> simpson_weights(std::size_t n_intervals, double step) {
    std::vector<double> w(n_intervals + 1, 0.0);
    for (std::size_t i = 0; i <= n_intervals; ++i) {
        double c = (i == 0 || i == n_intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * step / 3.0;
    }
    return w;
}

std::size_t even_intervals(double half_width, double step) {
    auto n = static_cast<std::size_t>(std::round(2.0 * half_width / step));
    if (n % 2 == 1) ++n;
    if (n < 2) n = 2;
    return n;
}

struct QuadGrid {
    std::size_t nt, ns;  // interval counts
    double step;
    std::vector<double> wt, ws;
    std::vector<double> k_ext;   // kernel on the combined grid
    std::size_t offset;          // index of t = -S in k_ext
};

QuadGrid build_grid(const HomoclinicKernel& kernel, const SpectralConfig& cfg,
                    bool derivative) {
    QuadGrid g;
    g.step = cfg.step;
    g.nt = even_intervals(cfg.S, cfg.step);
    g.ns = even_intervals(cfg.S_r, cfg.step);
    g.wt = simpson_weights(g.nt, cfg.step);
    g.ws = simpson_weights(g.ns, cfg.step);
    g.offset = g.ns / 2;
    const std::size_t n_ext = g.nt + g.ns + 1;
    g.k_ext.resize(n_ext);
    const double base = -cfg.S - cfg.S_r;
    for (std::size_t k = 0; k < n_ext; ++k) {
        const double s = base + cfg.step * static_cast<double>(k);
        g.k_ext[k] = derivative ? kernel.deriv(s) : kernel.value(s);
    }
    return g;
}

double correlate_grid(const QuadGrid& g, const Kernel& noise_kernel, double h,
                      const SpectralConfig& cfg) {
    // Precompute r(s_j - h) * ws_j.
    std::vector<double> rv(g.ns + 1);
    for (std::size_t j = 0; j <= g.ns; ++j) {
        const double s = -cfg.S_r + g.step * static_cast<double>(j);
        rv[j] = noise_kernel(s - h) * g.ws[j];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i <= g.nt; ++i) {
        double inner = 0.0;
        const double* row = g.k_ext.data() + i;
        for (std::size_t j = 0; j <= g.ns; ++j) inner += row[j] * rv[j];
        acc += g.wt[i] * g.k_ext[i + g.offset] * inner;
    }
    return acc;
}

}  // namespace

double process_autocorrelation(const HomoclinicKernel& kernel, const Kernel& noise_kernel,
                               double h, const SpectralConfig& cfg) {
    if (std::fabs(h) > cfg.max_lag + 1e-12)
        throw std::invalid_argument("process_autocorrelation: |h| exceeds configured max lag");
    const QuadGrid g = build_grid(kernel, cfg, false);
    return correlate_grid(g, noise_kernel, h, cfg);
}

SpectralMoments spectral_moments(const HomoclinicKernel& kernel, const Kernel& noise_kernel,
                                 const SpectralConfig& cfg) {
    const QuadGrid g = build_grid(kernel, cfg, false);
    const QuadGrid gd = build_grid(kernel, cfg, true);

    SpectralMoments m;
    m.chi0 = correlate_grid(g, noise_kernel, 0.0, cfg);
    m.chi2 = correlate_grid(gd, noise_kernel, 0.0, cfg);
    for (double* chi : {&m.chi0, &m.chi2}) {
        if (*chi < -1e-10)
            throw std::runtime_error("spectral moment came out negative; quadrature failure");
        if (*chi < 0) *chi = 0;
    }

    // Cross-check chi2 against -rho''(0) on a 5-point stencil.
    const double hf = cfg.fd_step;
    const double rm2 = correlate_grid(g, noise_kernel, -2 * hf, cfg);
    const double rm1 = correlate_grid(g, noise_kernel, -hf, cfg);
    const double rp1 = correlate_grid(g, noise_kernel, hf, cfg);
    const double rp2 = correlate_grid(g, noise_kernel, 2 * hf, cfg);
    m.chi2_fd = -(-rm2 + 16 * rm1 - 30 * m.chi0 + 16 * rp1 - rp2) / (12 * hf * hf);
    m.chi2_fd_rel_err = m.chi2 > 0 ? std::fabs(m.chi2 - m.chi2_fd) / m.chi2 : 0.0;

    const int nr = std::max(3, cfg.n_rho_samples | 1);  // odd, so h = 0 is sampled
    m.rho_samples.reserve(nr);
    for (int i = 0; i < nr; ++i) {
        const double h = -cfg.max_lag + 2.0 * cfg.max_lag * i / (nr - 1);
        m.rho_samples.emplace_back(h, correlate_grid(g, noise_kernel, h, cfg));
    }
    return m;
}

double rice_expected_zeros(const SpectralMoments& m, double T) {
    if (!(m.chi0 > 0)) throw std::domain_error("rice formula: chi0 must be positive");
    return T / std::numbers::pi * std::sqrt(m.chi2 / m.chi0);
}

double rice_expected_level_crossings(const SpectralMoments& m, double T, double v) {
    return rice_expected_zeros(m, T) * std::exp(-v * v / (2.0 * m.chi0));
}

CrossingStats monte_carlo_crossings(const ModelSpec& model, const Kernel& kernel,
                                    double I, double phi, double tau, double T, double v,
                                    int n_paths, std::uint64_t master_seed,
                                    MelnikovKind kind, const MelnikovConfig& mcfg,
                                    const SpectralConfig& scfg,
                                    const SpectralMoments* precomputed) {
    if (n_paths < 2) throw std::invalid_argument("monte_carlo_crossings: need n_paths >= 2");

    CrossingStats stats;
    stats.n_paths = n_paths;
    stats.T = T;
    stats.v = v;
    const HomoclinicKernel hk = kind == MelnikovKind::EnergyP
                                    ? energy_bracket_kernel(model, I, phi, tau)
                                    : action_bracket_kernel(model, I, phi, tau);
    stats.moments = precomputed ? *precomputed : spectral_moments(hk, kernel, scfg);
    stats.predicted = rice_expected_level_crossings(stats.moments, T, v);

    const double dt = 0.01;
    const double t_start = -mcfg.S - 1.0;
    const auto n_nodes =
        static_cast<std::size_t>(std::ceil((T + 2.0 * mcfg.S + 2.0) / dt)) + 1;
    const auto n_eval = static_cast<std::size_t>(std::floor(T / dt)) + 1;

    auto count_crossings = [v](const std::vector<double>& vals, std::size_t stride) {
        int n = 0;
        for (std::size_t k = 0; k + stride < vals.size(); k += stride)
            if ((vals[k] - v) * (vals[k + stride] - v) < 0.0) ++n;
        return n;
    };

    double sum = 0, sum_sq = 0, sum_coarse = 0;
    for (int i = 0; i < n_paths; ++i) {
        const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
        const NoisePath path = NoisePath::sample(kernel, t_start, dt, n_nodes, seed);
        const MelnikovSeries series =
            kind == MelnikovKind::EnergyP
                ? melnikov_P_grid(model, path, I, phi, tau, 0.0, n_eval, mcfg)
                : melnikov_I_grid(model, path, I, phi, tau, 0.0, n_eval, mcfg);
        const std::vector<double> vals = series.plain_values();
        const int n_fine = count_crossings(vals, 1);
        sum += n_fine;
        sum_sq += static_cast<double>(n_fine) * n_fine;
        sum_coarse += count_crossings(vals, 2);
    }
    const double n = n_paths;
    stats.empirical_mean = sum / n;
    stats.coarse_mean = sum_coarse / n;
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    stats.empirical_se = std::sqrt(var / n);
    return stats;
}

MomentPositivity smp_smi_check(const SpectralMoments& mP, const SpectralMoments& mI) {
    MomentPositivity r;
    r.chi0_P = mP.chi0;
    r.chi2_P = mP.chi2;
    r.chi0_I = mI.chi0;
    r.chi2_I = mI.chi2;
    r.ok = r.chi0_P > 1e-12 && r.chi2_P > 1e-12 && r.chi0_I > 1e-12 && r.chi2_I > 1e-12;
    return r;
}

}  // namespace rotopend
