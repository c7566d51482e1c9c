#include "rotopend/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rotopend/rng.hpp"

namespace rotopend {

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_loglog: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    SlopeFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

ConservationResult conservation_check(const ModelSpec& m, int n_starts, double T,
                                      double h, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ConservationResult r;
    r.n_starts = n_starts;
    r.T = T;
    IntegratorConfig cfg;
    cfg.h = h;
    for (int i = 0; i < n_starts; ++i) {
        const State z0(-1.5 + 3.0 * rng.next_unit(), rng.next_unit(),
                       -1.0 + 2.0 * rng.next_unit(), rng.next_unit());
        const double e0 = hamiltonian0(m, z0);
        const Trajectory traj = integrate_unperturbed(m, z0, 0.0, T, cfg);
        for (const State& z : traj.states)
            r.max_drift = std::max(r.max_drift, std::fabs(hamiltonian0(m, z) - e0));
    }
    return r;
}

SeparatrixFidelity separatrix_fidelity(const ModelSpec& m, double tau_lo, double tau_hi,
                                       double h) {
    const SeparatrixPoint s0 = separatrix(m, tau_lo);
    IntegratorConfig cfg;
    cfg.h = h;
    const Trajectory traj =
        integrate_unperturbed(m, State(1.0, 0.0, s0.p0, s0.q0), 0.0, tau_hi - tau_lo, cfg);
    SeparatrixFidelity f;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const SeparatrixPoint ref = separatrix(m, tau_lo + traj.times[k]);
        const double dp = traj.states[k].p - ref.p0;
        const double dq = traj.states[k].q - wrap_unit(ref.q0);
        f.sup_error = std::max(f.sup_error, std::sqrt(dp * dp + dq * dq));
    }
    return f;
}

NoiseEnsembleStats noise_ensemble_stats(const Kernel& kernel, int n_paths,
                                        std::uint64_t master_seed) {
    NoiseEnsembleStats s;
    s.n_paths = n_paths;
    s.lag1_expected = kernel(1.0);
    const double dt = 0.01;
    const std::size_t n = 128;  // lag 1.0 lives 100 nodes apart
    std::vector<double> x0(n_paths), x1(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        SampleReport rep;
        const NoisePath p = NoisePath::sample(
            kernel, 0.0, dt, n, derive_seed(master_seed, static_cast<std::uint64_t>(i)), &rep);
        s.clipped_eigenvalues += rep.clipped_eigenvalues;
        x0[i] = p.values()[0];
        x1[i] = p.values()[100];
    }
    const double n_d = static_cast<double>(n_paths);
    auto mean = [n_d](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / n_d;
    };
    const double m0 = mean(x0), m1 = mean(x1);
    double v0 = 0, v1 = 0, cov = 0;
    for (int i = 0; i < n_paths; ++i) {
        v0 += (x0[i] - m0) * (x0[i] - m0);
        v1 += (x1[i] - m1) * (x1[i] - m1);
        cov += (x0[i] - m0) * (x1[i] - m1);
    }
    v0 /= n_d - 1;
    v1 /= n_d - 1;
    cov /= n_d - 1;
    s.node_variance = v0;
    s.node_variance_se = v0 * std::sqrt(2.0 / (n_d - 1));
    s.lag1_corr = cov / std::sqrt(v0 * v1);
    s.lag1_corr_se = (1.0 - s.lag1_corr * s.lag1_corr) / std::sqrt(n_d);

    try {
        make_kernel(KernelFamily::PoweredExponential, 1.0);
        s.exponent_one_rejected = false;
    } catch (const std::invalid_argument&) {
        s.exponent_one_rejected = true;
    }
    return s;
}

double calibrate_envelope_A(const Kernel& kernel, double B, double t_start, double dt,
                            std::size_t n, int n_paths, std::uint64_t master_seed,
                            double percentile) {
    std::vector<double> envs(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        const NoisePath p = NoisePath::sample(
            kernel, t_start, dt, n, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        envs[i] = sublinearity_envelope(p, B);
    }
    std::sort(envs.begin(), envs.end());
    const auto idx = std::min<std::size_t>(
        envs.size() - 1, static_cast<std::size_t>(std::ceil(percentile * n_paths)) - 1);
    return envs[idx];
}

MeasureBoundResult sublinearity_measure_check(const Kernel& kernel, double B, double T,
                                              int n_calib, int n_fresh, double percentile,
                                              std::uint64_t master_seed) {
    const double dt = 0.01;
    const double margin = 20.0;
    const double t_start = -(T + margin);
    const auto n = static_cast<std::size_t>(std::round(2.0 * (T + margin) / dt)) + 1;

    MeasureBoundResult r;
    r.B = B;
    r.T = T;
    r.n_paths = n_fresh;
    r.A = calibrate_envelope_A(kernel, B, t_start, dt, n, n_calib, master_seed, percentile);
    r.min_ratio = 1.0;
    double sum = 0;
    for (int i = 0; i < n_fresh; ++i) {
        const std::uint64_t seed =
            derive_seed(master_seed ^ 0x5bf0a8b1ULL, static_cast<std::uint64_t>(i));
        const NoisePath p = NoisePath::sample(kernel, t_start, dt, n, seed);
        const SublinearityReport rep = admissible_times(p, r.A, B, T);
        sum += rep.measure_ratio;
        r.min_ratio = std::min(r.min_ratio, rep.measure_ratio);
    }
    r.mean_ratio = sum / n_fresh;
    return r;
}

ModifiedConsistency modified_consistency_check(const ModelSpec& m, const Kernel& kernel,
                                               double eps, int n_seeds, int per_seed,
                                               std::uint64_t master_seed) {
    const double dt = 0.01;
    const double T = 25.0;
    const double t_start = -(T + 5.0);
    const auto n = static_cast<std::size_t>(std::round(2.0 * (T + 5.0) / dt)) + 1;
    const double B = 0.1;
    const double A =
        calibrate_envelope_A(kernel, B, t_start, dt, n, 100, master_seed ^ 0xa5a5ULL, 0.99);

    ModifiedConsistency out;
    out.A = A;
    SplitMix64 rng(master_seed ^ 0x77ULL);
    IntegratorConfig cfg;
    for (int i = 0; i < n_seeds; ++i) {
        const NoisePath path = NoisePath::sample(
            kernel, t_start, dt, n, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        const SublinearityReport rep = admissible_times(path, A, B, T - 2.0);
        // Anchor at interval midpoints, strictly inside the admissible set.
        std::vector<double> anchors;
        for (const auto& [lo, hi] : rep.admissible) {
            if (anchors.size() >= static_cast<std::size_t>(per_seed)) break;
            anchors.push_back(0.5 * (lo + hi));
            if (hi - lo > 4.0 && anchors.size() < static_cast<std::size_t>(per_seed))
                anchors.push_back(lo + 0.25 * (hi - lo));
        }
        for (double t0 : anchors) {
            const State z0(0.2 + 0.6 * rng.next_unit(), rng.next_unit(),
                           -0.3 + 0.6 * rng.next_unit(), rng.next_unit());
            BumpSpec bump{A, 0.5, B};
            const Trajectory a = integrate_modified(m, path, eps, bump, z0, t0, t0 + 1.0, cfg);
            const Trajectory b = integrate(m, path, eps, z0, t0, t0 + 1.0, cfg);
            double sup = 0;
            for (std::size_t k = 0; k < a.states.size(); ++k)
                sup = std::max(sup, state_distance(a.states[k], b.states[k]));
            out.max_sup_diff = std::max(out.max_sup_diff, sup);
            ++out.n_windows;
        }
    }
    return out;
}

GronwallBattery gronwall_battery(const ModelSpec& m, const Kernel& kernel, double eps,
                                 int n_windows, std::uint64_t master_seed) {
    GronwallBattery out;
    out.constants = estimate_gronwall_constants(m, 0.5, master_seed ^ 0x9ULL);
    const double dt = 0.01;
    SplitMix64 rng(master_seed);
    for (int i = 0; i < n_windows; ++i) {
        const double t0 = -10.0 + 20.0 * rng.next_unit();
        const NoisePath path = NoisePath::sample(
            kernel, t0 - 2.0, dt, static_cast<std::size_t>(std::round(5.0 / dt)),
            derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        State z0;
        for (;;) {
            z0 = State(-0.5 + 2.0 * rng.next_unit(), rng.next_unit(),
                       -0.6 + 1.2 * rng.next_unit(), rng.next_unit());
            const double P = pendulum_energy(m, z0.p, z0.q);
            if (P >= -0.09 && P <= 0.09) break;
        }
        // Generous envelope: the bump stays 1 over the window, matching the
        // measured noise sup used in the bound.
        const BumpSpec bump{1e6, 0.5, 0.1};
        const FlowDistance d = flow_distance(m, path, eps, bump, z0, t0);
        const GronwallCheck check = check_flow_distance_bounds(out.constants, eps, d);
        ++out.n_windows;
        if (!check.ok) ++out.n_failures;
        if (check.state_bound > 0)
            out.worst_state_margin = std::max(out.worst_state_margin, d.c0 / check.state_bound);
        if (check.jac_bound > 0)
            out.worst_jac_margin = std::max(out.worst_jac_margin, d.jac_diff / check.jac_bound);
    }
    return out;
}

EvaluatorChecks melnikov_evaluator_checks(const ModelSpec& m, const Kernel& kernel,
                                          std::uint64_t master_seed,
                                          int n_invariance_pairs) {
    EvaluatorChecks out;
    out.n_invariance_pairs = n_invariance_pairs;
    const MelnikovConfig cfg;
    const double dt = 0.01;
    const double span = cfg.S + 6.0;
    const auto n = static_cast<std::size_t>(std::round(2.0 * span / dt)) + 1;

    // Linearity: exact linear functional of the path values.
    {
        const auto f1 = [](double t) { return std::sin(0.7 * t) * std::exp(-t * t / 800.0); };
        const auto f2 = [](double t) { return std::cos(1.3 * t + 0.4); };
        const double a = 0.7, b = -1.3;
        const NoisePath w1 = NoisePath::from_function(f1, -span, dt, n);
        const NoisePath w2 = NoisePath::from_function(f2, -span, dt, n);
        const NoisePath wc = NoisePath::from_function(
            [&](double t) { return a * f1(t) + b * f2(t); }, -span, dt, n);
        const double I = 1.0, phi = 0.15;
        const double m1 = melnikov_P(m, w1, I, phi, 0.0, 0.0, cfg).value;
        const double m2 = melnikov_P(m, w2, I, phi, 0.0, 0.0, cfg).value;
        const double mc = melnikov_P(m, wc, I, phi, 0.0, 0.0, cfg).value;
        out.linearity_residual = std::fabs(mc - (a * m1 + b * m2));
    }

    // FFT grid versus direct quadrature on spot-checked nodes.
    {
        const std::size_t n_grid = 4096;
        const auto n_long =
            static_cast<std::size_t>(std::round((2.0 * span + n_grid * dt) / dt)) + 1;
        const NoisePath path =
            NoisePath::sample(kernel, -span, dt, n_long, derive_seed(master_seed, 1001));
        const ExperimentPoint pt;
        const MelnikovSeries series =
            melnikov_P_grid(m, path, pt.I, pt.phi, pt.tau, 0.0, n_grid, cfg);
        for (std::size_t j = 0; j < n_grid; j += n_grid / 16) {
            const double direct =
                melnikov_P(m, path, pt.I, pt.phi, pt.tau, series.times[j], cfg).value;
            out.fft_vs_direct =
                std::max(out.fft_vs_direct, std::fabs(series.values[j].value - direct));
        }
    }

    // Time invariance over random (sigma, seed) pairs.
    {
        SplitMix64 rng(master_seed ^ 0x1234ULL);
        const ExperimentPoint pt;
        for (int i = 0; i < n_invariance_pairs; ++i) {
            const double sigma = -3.0 + 6.0 * rng.next_unit();
            const auto n_ti = static_cast<std::size_t>(std::round((2.0 * span + 8.0) / dt)) + 1;
            const NoisePath path = NoisePath::sample(
                kernel, -span - 4.0, dt, n_ti, derive_seed(master_seed, 2000 + i));
            const double resid = time_invariance_residual(m, path, pt.I, pt.phi, pt.tau,
                                                          0.0, sigma, cfg);
            out.max_time_invariance = std::max(out.max_time_invariance, resid);
        }
    }
    return out;
}

NoisePath experiment_path(const Kernel& kernel, std::uint64_t seed, double t_lo,
                          double t_hi, double dt, double S) {
    const double lo = t_lo - S - 4.0;
    const double hi = t_hi + S + 4.0;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dt)) + 1;
    return NoisePath::sample(kernel, lo, dt, n, seed);
}

PickedAnchor pick_melnikov_anchor(const ModelSpec& m, const NoisePath& path,
                                  const ExperimentPoint& pt, MelnikovKind kind,
                                  const SublinearityReport& admissible, double scan_t0,
                                  double scan_T, const MelnikovConfig& cfg) {
    const auto n = static_cast<std::size_t>(std::floor(scan_T / path.dt())) + 1;
    const MelnikovSeries series =
        kind == MelnikovKind::EnergyP
            ? melnikov_P_grid(m, path, pt.I, pt.phi, pt.tau, scan_t0, n, cfg)
            : melnikov_I_grid(m, path, pt.I, pt.phi, pt.tau, scan_t0, n, cfg);
    PickedAnchor a;
    bool found = false;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = std::fabs(series.values[j].value);
        a.series_max = std::max(a.series_max, v);
        if (v > std::fabs(a.melnikov_value) && admissible.is_admissible(series.times[j])) {
            a.melnikov_value = series.values[j].value;
            a.t0 = series.times[j];
            found = true;
        }
    }
    if (!found)
        throw std::runtime_error("pick_melnikov_anchor: no admissible anchor in the scan");
    return a;
}

namespace {

FirstOrderSweep run_sweep(const ModelSpec& m, const NoisePath& path,
                          std::span<const double> eps_list, const ExperimentPoint& pt,
                          double t0, double eps_ref, const ManifoldShootConfig& cfg,
                          const MelnikovConfig& mcfg, bool splitting) {
    FirstOrderSweep sweep;
    sweep.t0 = t0;
    sweep.eps_ref = eps_ref;
    const MelnikovValue mv =
        splitting ? melnikov_P(m, path, pt.I, pt.phi, pt.tau, t0, mcfg)
                  : melnikov_I(m, path, pt.I, pt.phi, pt.tau, t0, mcfg);
    sweep.melnikov_value = mv.value;

    std::vector<double> xs, ys;
    for (double eps : eps_list) {
        SweepRow row;
        row.eps = eps;
        if (splitting) {
            row.measured = splitting_measured(m, path, eps, pt.I, pt.phi, t0, cfg).distance;
            row.predicted = -eps * mv.value;
        } else {
            row.measured = action_change_measured(m, path, eps, pt.I, pt.phi, t0, cfg).deltaI;
            row.predicted = eps * mv.value;
        }
        row.residual = std::fabs(row.measured - row.predicted);
        sweep.rows.push_back(row);
        xs.push_back(eps);
        ys.push_back(row.residual);
        if (std::fabs(eps - eps_ref) < 1e-15)
            sweep.rel_error_at_ref =
                std::fabs(row.measured / (splitting ? -eps : eps) - mv.value) /
                std::fabs(mv.value);
    }
    sweep.slope = fit_loglog(xs, ys).slope;
    return sweep;
}

}  // namespace

FirstOrderSweep splitting_sweep(const ModelSpec& m, const NoisePath& path,
                                std::span<const double> eps_list, const ExperimentPoint& pt,
                                double t0, double eps_ref, const ManifoldShootConfig& cfg,
                                const MelnikovConfig& mcfg) {
    return run_sweep(m, path, eps_list, pt, t0, eps_ref, cfg, mcfg, true);
}

FirstOrderSweep action_sweep(const ModelSpec& m, const NoisePath& path,
                             std::span<const double> eps_list, const ExperimentPoint& pt,
                             double t0, double eps_ref, const ManifoldShootConfig& cfg,
                             const MelnikovConfig& mcfg) {
    return run_sweep(m, path, eps_list, pt, t0, eps_ref, cfg, mcfg, false);
}

MomentsCrossCheck moments_crosscheck(const ModelSpec& m, const Kernel& kernel,
                                     const ExperimentPoint& pt, int n_paths,
                                     std::uint64_t master_seed, const MelnikovConfig& mcfg,
                                     const SpectralConfig& scfg) {
    MomentsCrossCheck out;
    out.n_paths = n_paths;
    const HomoclinicKernel hk = energy_bracket_kernel(m, pt.I, pt.phi, pt.tau);
    const SpectralMoments moments = spectral_moments(hk, kernel, scfg);
    out.chi0 = moments.chi0;
    out.chi2 = moments.chi2;
    out.chi2_fd = moments.chi2_fd;
    out.chi2_fd_rel_err = moments.chi2_fd_rel_err;

    const double dt = 0.01;
    const double t_start = -mcfg.S - 0.5;
    const auto n = static_cast<std::size_t>(std::ceil((2.0 * mcfg.S + 1.0) / dt)) + 1;

    double sum = 0, sum_sq = 0;
    for (int i = 0; i < n_paths; ++i) {
        const NoisePath path = NoisePath::sample(
            kernel, t_start, dt, n, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        const double v = homoclinic_noise_integral(hk, path, 0.0, mcfg.S);
        sum += v;
        sum_sq += v * v;
    }
    const double nd = static_cast<double>(n_paths);
    const double mean = sum / nd;
    out.mc_variance = (sum_sq - nd * mean * mean) / (nd - 1.0);
    out.mc_se = out.mc_variance * std::sqrt(2.0 / (nd - 1.0));
    return out;
}

MicroDiffusionReport micro_diffusion_experiment(const ModelSpec& m, const Kernel& kernel,
                                                double eps, const ExperimentPoint& pt,
                                                double level_fraction, std::uint64_t seed,
                                                double scan_T) {
    const NoisePath path = experiment_path(kernel, seed, -20.0, scan_T + 20.0);
    const double B = 0.1;
    const double A = calibrate_envelope_A(kernel, B, path.t_start(), path.dt(),
                                          path.size(), 100, seed ^ 0xca11ULL, 0.99);
    const double T_adm = std::min(-path.t_start(), path.t_end()) - 1.0;
    const SublinearityReport adm = admissible_times(path, A, B, T_adm);

    // First scan to size the level, then the demo proper.
    const MelnikovConfig mcfg;
    const auto n = static_cast<std::size_t>(std::floor(scan_T / path.dt())) + 1;
    const MelnikovSeries series =
        melnikov_I_grid(m, path, pt.I, pt.phi, pt.tau, 0.0, n, mcfg);
    const std::vector<double> vals = series.plain_values();
    const double v = level_fraction * *std::max_element(vals.begin(), vals.end());

    return micro_diffusion_demo(m, path, eps, pt.I, pt.phi, v, 0.0, scan_T, adm, mcfg);
}

}  // namespace rotopend
