#ifndef ROTOPEND_EXPERIMENTS_HPP
#define ROTOPEND_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotopend/gronwall.hpp"
#include "rotopend/melnikov.hpp"
#include "rotopend/spectral.hpp"

namespace rotopend {

// Canonical coordinates shared by the lab experiments. The rotator frequency
// nu(I) = 0.5 sits where the a=2 noise spectrum still has appreciable power,
// so the first-order Melnikov terms dominate at the eps values probed.
struct ExperimentPoint {
    double I = 0.5;
    double phi = 0.15;
    double tau = 0.0;
};

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
};

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

// ---- noise-level checks -------------------------------------------------

struct ConservationResult {
    double max_drift = 0;
    int n_starts = 0;
    double T = 0;
};
ConservationResult conservation_check(const ModelSpec& m, int n_starts, double T,
                                      double h, std::uint64_t seed);

struct SeparatrixFidelity {
    double sup_error = 0;
};
SeparatrixFidelity separatrix_fidelity(const ModelSpec& m, double tau_lo, double tau_hi,
                                       double h);

struct NoiseEnsembleStats {
    int n_paths = 0;
    double node_variance = 0, node_variance_se = 0;
    double lag1_corr = 0, lag1_corr_se = 0, lag1_expected = 0;
    bool exponent_one_rejected = false;
    int clipped_eigenvalues = 0;
};
NoiseEnsembleStats noise_ensemble_stats(const Kernel& kernel, int n_paths,
                                        std::uint64_t master_seed);

// A at the given percentile of the per-path envelope intercept over a
// calibration ensemble with the stated grid layout.
double calibrate_envelope_A(const Kernel& kernel, double B, double t_start, double dt,
                            std::size_t n, int n_paths, std::uint64_t master_seed,
                            double percentile);

struct MeasureBoundResult {
    double A = 0;
    double B = 0;
    double T = 0;
    double mean_ratio = 0;
    double min_ratio = 0;
    int n_paths = 0;
};
MeasureBoundResult sublinearity_measure_check(const Kernel& kernel, double B, double T,
                                              int n_calib, int n_fresh, double percentile,
                                              std::uint64_t master_seed);

// ---- modified-system and Gronwall checks --------------------------------

struct ModifiedConsistency {
    double max_sup_diff = 0;
    int n_windows = 0;
    double A = 0;
};
ModifiedConsistency modified_consistency_check(const ModelSpec& m, const Kernel& kernel,
                                               double eps, int n_seeds, int per_seed,
                                               std::uint64_t master_seed);

struct GronwallBattery {
    int n_windows = 0;
    int n_failures = 0;
    double worst_state_margin = 0;  // max measured/bound for the state leg
    double worst_jac_margin = 0;
    GronwallConstants constants;
};
GronwallBattery gronwall_battery(const ModelSpec& m, const Kernel& kernel, double eps,
                                 int n_windows, std::uint64_t master_seed);

// ---- Melnikov evaluator checks -------------------------------------------

struct EvaluatorChecks {
    double linearity_residual = 0;
    double fft_vs_direct = 0;
    double max_time_invariance = 0;
    int n_invariance_pairs = 0;
};
EvaluatorChecks melnikov_evaluator_checks(const ModelSpec& m, const Kernel& kernel,
                                          std::uint64_t master_seed,
                                          int n_invariance_pairs);

// ---- first-order experiments ----------------------------------------------

// Path layout big enough for Melnikov windows and manifold shots anchored
// anywhere in [t_lo, t_hi].
NoisePath experiment_path(const Kernel& kernel, std::uint64_t seed, double t_lo,
                          double t_hi, double dt = 0.01, double S = 40.0);

struct PickedAnchor {
    double t0 = 0;
    double melnikov_value = 0;  // at the anchor
    double series_max = 0;      // max |M| over the scan
};

// Deterministic anchor choice: the admissible grid node maximizing |M| over
// the scanned window.
PickedAnchor pick_melnikov_anchor(const ModelSpec& m, const NoisePath& path,
                                  const ExperimentPoint& pt, MelnikovKind kind,
                                  const SublinearityReport& admissible, double scan_t0,
                                  double scan_T, const MelnikovConfig& cfg = {});

struct SweepRow {
    double eps = 0;
    double measured = 0;   // D(eps) or deltaI
    double predicted = 0;  // -eps M^P or eps M^I
    double residual = 0;   // |measured - predicted|
};

struct FirstOrderSweep {
    std::vector<SweepRow> rows;
    double melnikov_value = 0;
    double t0 = 0;
    double slope = 0;           // log-log slope of residual vs eps
    double rel_error_at_ref = 0;
    double eps_ref = 0;
};

FirstOrderSweep splitting_sweep(const ModelSpec& m, const NoisePath& path,
                                std::span<const double> eps_list, const ExperimentPoint& pt,
                                double t0, double eps_ref,
                                const ManifoldShootConfig& cfg = {},
                                const MelnikovConfig& mcfg = {});

FirstOrderSweep action_sweep(const ModelSpec& m, const NoisePath& path,
                             std::span<const double> eps_list, const ExperimentPoint& pt,
                             double t0, double eps_ref,
                             const ManifoldShootConfig& cfg = {},
                             const MelnikovConfig& mcfg = {});

// ---- moments cross-validation ---------------------------------------------

struct MomentsCrossCheck {
    double chi0 = 0;
    double mc_variance = 0;
    double mc_se = 0;  // standard error of the MC variance estimate
    double chi2 = 0;
    double chi2_fd = 0;
    double chi2_fd_rel_err = 0;
    int n_paths = 0;
};
MomentsCrossCheck moments_crosscheck(const ModelSpec& m, const Kernel& kernel,
                                     const ExperimentPoint& pt, int n_paths,
                                     std::uint64_t master_seed,
                                     const MelnikovConfig& mcfg = {},
                                     const SpectralConfig& scfg = {});

// Micro-diffusion demo at v = level_fraction * (scanned M^I max).
MicroDiffusionReport micro_diffusion_experiment(const ModelSpec& m, const Kernel& kernel,
                                                double eps, const ExperimentPoint& pt,
                                                double level_fraction,
                                                std::uint64_t seed, double scan_T = 40.0);

}  // namespace rotopend

#endif
