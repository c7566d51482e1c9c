#ifndef ROTOPEND_SPECTRAL_HPP
#define ROTOPEND_SPECTRAL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "rotopend/kernel.hpp"
#include "rotopend/melnikov.hpp"
#include "rotopend/model.hpp"

namespace rotopend {

struct SpectralConfig {
    double S = 40.0;      // half-width for the homoclinic factor
    double S_r = 8.0;     // half-width for the noise-kernel lag
    double step = 0.01;
    double max_lag = 2.0; // rho(h) sampled on [-max_lag, max_lag]
    int n_rho_samples = 21;
    double fd_step = 0.05;  // step of the -rho''(0) cross-check stencil
};

struct SpectralMoments {
    double chi0 = 0;
    double chi2 = 0;
    double chi2_fd = 0;          // -rho''(0) by 5-point finite differences
    double chi2_fd_rel_err = 0;  // |chi2 - chi2_fd| / chi2
    std::vector<std::pair<double, double>> rho_samples;
};

// rho(h) = int int K(t) K(t+s) r(s - h) dt ds by 2D composite Simpson with
// certified-by-size truncation (K is exponentially localized, r integrable).
double process_autocorrelation(const HomoclinicKernel& kernel, const Kernel& noise_kernel,
                               double h, const SpectralConfig& cfg = {});

// chi0 from the kernel itself, chi2 from its analytic derivative, plus the
// finite-difference cross-check and sampled rho(h).
SpectralMoments spectral_moments(const HomoclinicKernel& kernel, const Kernel& noise_kernel,
                                 const SpectralConfig& cfg = {});

// (T/pi) sqrt(chi2/chi0); requires chi0 > 0.
double rice_expected_zeros(const SpectralMoments& m, double T);

// Zeros formula times exp(-v^2 / (2 chi0)).
double rice_expected_level_crossings(const SpectralMoments& m, double T, double v);

enum class MelnikovKind { EnergyP, ActionI };

struct CrossingStats {
    int n_paths = 0;
    double T = 0;
    double v = 0;
    double empirical_mean = 0;
    double empirical_se = 0;
    double predicted = 0;
    double coarse_mean = 0;  // same series counted on every other node
    SpectralMoments moments;
};

// Counts strict sign changes of (M(t) - v) on the dt-grid over [0, T] for
// n_paths independently seeded paths and compares with the Rice prediction.
CrossingStats monte_carlo_crossings(const ModelSpec& model, const Kernel& kernel,
                                    double I, double phi, double tau, double T, double v,
                                    int n_paths, std::uint64_t master_seed,
                                    MelnikovKind kind = MelnikovKind::EnergyP,
                                    const MelnikovConfig& mcfg = {},
                                    const SpectralConfig& scfg = {},
                                    const SpectralMoments* precomputed = nullptr);

struct MomentPositivity {
    bool ok = false;
    double chi0_P = 0, chi2_P = 0;
    double chi0_I = 0, chi2_I = 0;
};

// True iff all four spectral moments exceed 1e-12.
MomentPositivity smp_smi_check(const SpectralMoments& mP, const SpectralMoments& mI);

}  // namespace rotopend

#endif
