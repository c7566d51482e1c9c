#include "rotopend/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rotopend/fft.hpp"

namespace rotopend {

namespace {

// 3-point and 2-point Gauss-Legendre nodes on [0, 1].
constexpr double kGL3Theta[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGL3Weight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
constexpr double kGL2Theta[2] = {0.21132486540518712, 0.78867513459481288};
constexpr double kGL2Weight[2] = {0.5, 0.5};

double envelope_intercept_at(const NoisePath& path, double anchor, double B) {
    const auto& v = path.values();
    double A = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        A = std::max(A, std::fabs(v[i]) - B * std::fabs(path.node_time(i) - anchor));
    return A;
}

double kernel_envelope_constant(const HomoclinicKernel& k, double S) {
    // sup over the window of |K(s)| e^{beta |s|}; the kernel decays strictly
    // faster, so the sup is attained well inside.
    double best = 0.0;
    const double step = 0.02;
    for (double s = -S; s <= S; s += step)
        best = std::max(best, std::fabs(k.value(s)) * std::exp(k.decay_rate * std::fabs(s)));
    return best;
}

struct TailCertificate {
    double bound;
};

TailCertificate certify_tail(const HomoclinicKernel& k, const NoisePath& path,
                             double anchor, const MelnikovConfig& cfg) {
    const double K = kernel_envelope_constant(k, cfg.S);
    const double A = envelope_intercept_at(path, anchor, cfg.envelope_B);
    const double bound =
        K * std::exp(-k.decay_rate * cfg.S) * (A + cfg.envelope_B * cfg.S);
    if (!(bound < cfg.tol)) {
        std::ostringstream msg;
        msg << "melnikov tail bound " << bound << " exceeds tolerance target " << cfg.tol
            << " (S=" << cfg.S << ")";
        throw std::runtime_error(msg.str());
    }
    return {bound};
}

void check_window(const NoisePath& path, double t_eval, double S) {
    if (!path.contains(t_eval - S) || !path.contains(t_eval + S))
        throw std::out_of_range("melnikov window exceeds the noise path domain");
}

// Coefficients c_k such that sum_k c_k omega[k0 + k] reproduces the
// segment-wise Gauss-Legendre quadrature of kernel(t - t_eval) * omega(t).
std::vector<double> quadrature_weights(const HomoclinicKernel& kernel,
                                       const NoisePath& path, double t_eval, double S,
                                       std::size_t* k0_out, bool refined) {
    const std::size_t k0 = path.node_at_or_after(t_eval - S);
    const std::size_t k1 = path.node_at_or_before(t_eval + S);
    if (k1 <= k0) throw std::invalid_argument("melnikov window contains no grid segment");
    const double dt = path.dt();
    std::vector<double> c(k1 - k0 + 1, 0.0);
    for (std::size_t k = k0; k < k1; ++k) {
        const double s_left = path.node_time(k) - t_eval;
        if (refined) {
            for (int j = 0; j < 3; ++j) {
                const double kv = kernel.value(s_left + kGL3Theta[j] * dt) * kGL3Weight[j] * dt;
                c[k - k0] += kv * (1.0 - kGL3Theta[j]);
                c[k - k0 + 1] += kv * kGL3Theta[j];
            }
        } else {
            for (int j = 0; j < 2; ++j) {
                const double kv = kernel.value(s_left + kGL2Theta[j] * dt) * kGL2Weight[j] * dt;
                c[k - k0] += kv * (1.0 - kGL2Theta[j]);
                c[k - k0 + 1] += kv * kGL2Theta[j];
            }
        }
    }
    if (k0_out) *k0_out = k0;
    return c;
}

}  // namespace

HomoclinicKernel energy_bracket_kernel(const ModelSpec& m, double I, double phi,
                                       double tau) {
    HomoclinicKernel k;
    k.decay_rate = m.beta;
    k.value = [m, I, phi, tau](double s) {
        const SeparatrixPoint sp = separatrix(m, tau + s);
        return poisson_P_H1(m, State(I, phi + m.nu(I) * s, sp.p0, sp.q0));
    };
    k.deriv = [m, I, phi, tau](double s) {
        const SeparatrixPoint sp = separatrix(m, tau + s);
        const State z(I, phi + m.nu(I) * s, sp.p0, sp.q0);
        const Vec4 g = m.gradH1(z);
        const Mat4 h = m.hessH1(z);
        const double Vp = m.dV(sp.q0), Vpp = m.d2V(sp.q0);
        const double dF_dphi = Vp * h(2, 1) - sp.p0 * h(3, 1);
        const double dF_dp = Vp * h(2, 2) - (g[3] + sp.p0 * h(3, 2));
        const double dF_dq = Vpp * g[2] + Vp * h(2, 3) - sp.p0 * h(3, 3);
        return dF_dphi * m.nu(I) + dF_dp * (-Vp) + dF_dq * sp.p0;
    };
    return k;
}

HomoclinicKernel action_bracket_kernel(const ModelSpec& m, double I, double phi,
                                       double tau) {
    HomoclinicKernel k;
    k.decay_rate = m.beta;
    k.value = [m, I, phi, tau](double s) {
        const SeparatrixPoint sp = separatrix(m, tau + s);
        const double on_orbit = poisson_I_H1(m, State(I, phi + m.nu(I) * s, sp.p0, sp.q0));
        const double footpoint = poisson_I_H1(m, State(I, phi + m.nu(I) * s, 0.0, 0.0));
        return on_orbit - footpoint;
    };
    k.deriv = [m, I, phi, tau](double s) {
        const double nu = m.nu(I);
        const SeparatrixPoint sp = separatrix(m, tau + s);
        const State z(I, phi + nu * s, sp.p0, sp.q0);
        const Mat4 h = m.hessH1(z);
        const double d_orbit =
            -(h(1, 1) * nu + h(1, 2) * (-m.dV(sp.q0)) + h(1, 3) * sp.p0);
        const Mat4 h0 = m.hessH1(State(I, phi + nu * s, 0.0, 0.0));
        const double d_foot = -h0(1, 1) * nu;
        return d_orbit - d_foot;
    };
    return k;
}

double homoclinic_noise_integral(const HomoclinicKernel& kernel, const NoisePath& path,
                                 double t_eval, double S, double* quad_error) {
    check_window(path, t_eval, S);
    std::size_t k0 = 0;
    const std::vector<double> c = quadrature_weights(kernel, path, t_eval, S, &k0, true);
    const auto& w = path.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * w[k0 + i];
    if (quad_error) {
        const std::vector<double> c2 = quadrature_weights(kernel, path, t_eval, S, &k0, false);
        double acc2 = 0.0;
        for (std::size_t i = 0; i < c2.size(); ++i) acc2 += c2[i] * w[k0 + i];
        *quad_error = std::fabs(acc - acc2);
    }
    return acc;
}

namespace {

MelnikovValue evaluate_point(const HomoclinicKernel& kernel, const NoisePath& path,
                             double t_eval, const MelnikovConfig& cfg) {
    const TailCertificate tail = certify_tail(kernel, path, t_eval, cfg);
    MelnikovValue out;
    out.truncation_bound = tail.bound;
    out.value = homoclinic_noise_integral(kernel, path, t_eval, cfg.S,
                                          &out.quad_error_estimate);
    return out;
}

MelnikovSeries evaluate_grid(const HomoclinicKernel& kernel, const NoisePath& path,
                             double t_start, std::size_t n, const MelnikovConfig& cfg) {
    if (n == 0) throw std::invalid_argument("melnikov grid: need n >= 1");
    // Anchor must sit on the path grid so every grid point shares the same
    // node-aligned quadrature stencil.
    const double offset = (t_start - path.t_start()) / path.dt();
    if (std::fabs(offset - std::round(offset)) > 1e-6)
        throw std::invalid_argument("melnikov grid: t_start is not on the noise grid");
    const auto j_start = static_cast<std::size_t>(std::llround(offset));
    const double t0 = path.node_time(j_start);
    const double t_last = t0 + path.dt() * static_cast<double>(n - 1);
    check_window(path, t0, cfg.S);
    check_window(path, t_last, cfg.S);

    const double t_mid = 0.5 * (t0 + t_last);
    const double half_span = 0.5 * (t_last - t0);
    const double K = kernel_envelope_constant(kernel, cfg.S);
    const double A =
        envelope_intercept_at(path, t_mid, cfg.envelope_B) + cfg.envelope_B * half_span;
    const double tail_bound =
        K * std::exp(-kernel.decay_rate * cfg.S) * (A + cfg.envelope_B * cfg.S);
    if (!(tail_bound < cfg.tol))
        throw std::runtime_error("melnikov grid: tail bound exceeds tolerance target");

    std::size_t k0 = 0;
    const std::vector<double> c3 = quadrature_weights(kernel, path, t0, cfg.S, &k0, true);
    std::size_t k0b = 0;
    const std::vector<double> c2 = quadrature_weights(kernel, path, t0, cfg.S, &k0b, false);

    // out[j] = sum_k c[k] w[k0 + j + k]: a cross-correlation against the path.
    const auto& w = path.values();
    std::vector<double> seg(w.begin() + static_cast<std::ptrdiff_t>(k0), w.end());
    const std::vector<double> vals = fft::correlate(c3, seg, n);
    std::vector<double> diff(c3.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = c3[i] - c2[i];
    const std::vector<double> errs = fft::correlate(diff, seg, n);

    MelnikovSeries out;
    out.times.resize(n);
    out.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.times[j] = path.node_time(j_start + j);
        out.values[j].value = vals[j];
        out.values[j].truncation_bound = tail_bound;
        out.values[j].quad_error_estimate = std::fabs(errs[j]);
    }
    return out;
}

}  // namespace

std::vector<double> MelnikovSeries::plain_values() const {
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i].value;
    return v;
}

MelnikovValue melnikov_P(const ModelSpec& m, const NoisePath& path, double I,
                         double phi, double tau, double t_eval, const MelnikovConfig& cfg) {
    return evaluate_point(energy_bracket_kernel(m, I, phi, tau), path, t_eval, cfg);
}

MelnikovValue melnikov_I(const ModelSpec& m, const NoisePath& path, double I,
                         double phi, double tau, double t_eval, const MelnikovConfig& cfg) {
    return evaluate_point(action_bracket_kernel(m, I, phi, tau), path, t_eval, cfg);
}

MelnikovSeries melnikov_P_grid(const ModelSpec& m, const NoisePath& path, double I,
                               double phi, double tau, double t_start, std::size_t n,
                               const MelnikovConfig& cfg) {
    return evaluate_grid(energy_bracket_kernel(m, I, phi, tau), path, t_start, n, cfg);
}

MelnikovSeries melnikov_I_grid(const ModelSpec& m, const NoisePath& path, double I,
                               double phi, double tau, double t_start, std::size_t n,
                               const MelnikovConfig& cfg) {
    return evaluate_grid(action_bracket_kernel(m, I, phi, tau), path, t_start, n, cfg);
}

double time_invariance_residual(const ModelSpec& m, const NoisePath& path, double I,
                                double phi, double tau, double t_eval, double sigma,
                                const MelnikovConfig& cfg) {
    const MelnikovValue lhs = melnikov_P(m, path, I, phi, tau, t_eval, cfg);
    const MelnikovValue rhs =
        melnikov_P(m, path, I, phi + m.nu(I) * sigma, tau + sigma, t_eval + sigma, cfg);
    return std::fabs(lhs.value - rhs.value);
}

namespace {

// Newton root of the cubic through four (t, v) samples, started inside the
// bracketing segment. Falls back to the secant root of the bracket.
bool cubic_zero(const double* ts, const double* vs, int n, double lo, double hi,
                double* root, double* slope) {
    // Newton divided differences.
    double coef[4];
    double work[4];
    for (int i = 0; i < n; ++i) work[i] = vs[i];
    coef[0] = work[0];
    for (int order = 1; order < n; ++order) {
        for (int i = 0; i < n - order; ++i)
            work[i] = (work[i + 1] - work[i]) / (ts[i + order] - ts[i]);
        coef[order] = work[0];
    }
    auto eval = [&](double t, double* deriv) {
        double value = coef[n - 1];
        double d = 0.0;
        for (int i = n - 2; i >= 0; --i) {
            d = d * (t - ts[i]) + value;
            value = value * (t - ts[i]) + coef[i];
        }
        if (deriv) *deriv = d;
        return value;
    };
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        double d;
        const double v = eval(t, &d);
        if (d == 0.0) break;
        const double step = v / d;
        t -= step;
        if (t < lo - (hi - lo) || t > hi + (hi - lo)) return false;
        if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(t))) break;
    }
    if (!(t >= lo - 1e-12 && t <= hi + 1e-12)) return false;
    double d;
    eval(t, &d);
    *root = t;
    *slope = d;
    return true;
}

}  // namespace

ZeroScan find_zeros(std::span<const double> times, std::span<const double> values,
                    double degeneracy_threshold) {
    if (times.size() != values.size() || times.empty())
        throw std::invalid_argument("find_zeros: empty or mismatched series");
    ZeroScan scan;
    const std::size_t n = times.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = values[k], b = values[k + 1];
        const bool hit = (a == 0.0 && b != 0.0) || a * b < 0.0;
        if (!hit) continue;
        const std::size_t lo = k > 0 ? k - 1 : k;
        const std::size_t count = std::min<std::size_t>(4, n - lo);
        double root, slope;
        bool ok = count >= 2 && cubic_zero(&times[lo], &values[lo], static_cast<int>(count),
                                           times[k], times[k + 1], &root, &slope);
        if (!ok) {
            root = times[k] - a * (times[k + 1] - times[k]) / (b - a);
            slope = (b - a) / (times[k + 1] - times[k]);
        }
        if (std::fabs(slope) < degeneracy_threshold) {
            ++scan.flagged_degenerate;
            continue;
        }
        scan.zeros.push_back({root, slope});
    }
    return scan;
}

ZeroScan find_zeros(const MelnikovSeries& series, double degeneracy_threshold) {
    const std::vector<double> vals = series.plain_values();
    return find_zeros(series.times, vals, degeneracy_threshold);
}

std::vector<double> find_level_crossings(std::span<const double> times,
                                         std::span<const double> values, double level) {
    std::vector<double> shifted(values.begin(), values.end());
    for (double& v : shifted) v -= level;
    const ZeroScan scan = find_zeros(times, shifted, 0.0);
    std::vector<double> out;
    out.reserve(scan.zeros.size());
    for (const auto& z : scan.zeros) out.push_back(z.t);
    return out;
}

namespace {

struct Crossing {
    double t;
    State state;
};

// All section crossings q = q_ref of a stored trajectory, refined on the
// cubic Hermite interpolant of each bracketing step (the field supplies exact
// endpoint derivatives for every component).
std::vector<Crossing> section_crossings(
    const Trajectory& traj, double q_ref,
    const std::function<Vec4(double, const State&)>& field) {
    std::vector<Crossing> out;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const State& za = traj.states[k];
        const State& zb = traj.states[k + 1];
        if (std::fabs(zb.q - za.q) >= 0.5) continue;  // angle wrap, not a crossing
        const double a = za.q - q_ref, b = zb.q - q_ref;
        if (!((a == 0.0 && b != 0.0) || a * b < 0.0)) continue;
        const double h = traj.times[k + 1] - traj.times[k];
        const Vec4 fa = field(traj.times[k], za);
        const Vec4 fb = field(traj.times[k + 1], zb);
        // Newton on the Hermite cubic of q(t).
        double theta = a / (a - b);
        for (int it = 0; it < 50; ++it) {
            const double t2 = theta * theta, t3 = t2 * theta;
            const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
            const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
            const double qv =
                h00 * za.q + h10 * h * fa[3] + h01 * zb.q + h11 * h * fb[3] - q_ref;
            const double d00 = 6 * t2 - 6 * theta, d10 = 3 * t2 - 4 * theta + 1;
            const double d01 = -d00, d11 = 3 * t2 - 2 * theta;
            const double dq = d00 * za.q + d10 * h * fa[3] + d01 * zb.q + d11 * h * fb[3];
            if (dq == 0.0) break;
            const double step = qv / dq;
            theta -= step;
            if (std::fabs(step) < 1e-16) break;
        }
        theta = std::clamp(theta, 0.0, 1.0);
        auto hermite = [&](double ya, double da, double yb, double db) {
            const double t2 = theta * theta, t3 = t2 * theta;
            return (2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + theta) * h * da +
                   (-2 * t3 + 3 * t2) * yb + (t3 - t2) * h * db;
        };
        Crossing c;
        c.t = traj.times[k] + theta * h;
        c.state = State(hermite(za.I, fa[0], zb.I, fb[0]),
                        hermite(za.phi, fa[1], zb.phi, fb[1]),
                        hermite(za.p, fa[2], zb.p, fb[2]),
                        hermite(za.q, fa[3], zb.q, fb[3]));
        out.push_back(c);
    }
    return out;
}

void validate_shoot_config(const ModelSpec& m, const ManifoldShootConfig& cfg) {
    if (cfg.T_asym < 15.0 / m.beta)
        throw std::invalid_argument("manifold shot: T_asym must be at least 15/beta");
    if (!(cfg.seed_offset >= 1e-7 && cfg.seed_offset <= 1e-4))
        throw std::invalid_argument("manifold shot: seed_offset must lie in [1e-7, 1e-4]");
    const H1ConditionReport h1 = check_H1_condition(m);
    if (!h1.holds)
        throw std::invalid_argument(
            "manifold shot requires the perturbation to vanish on the cylinder (H1)");
}

struct SeedInfo {
    State state;        // displaced along the matching eigenvector
    double time_of_flight;  // unperturbed seed -> section
};

SeedInfo make_seed(const ModelSpec& m, ManifoldSide side, double I, double phi,
                   const ManifoldShootConfig& cfg) {
    const double beta = m.beta;
    const double nrm = std::sqrt(1.0 + beta * beta);
    double p, q;
    if (side == ManifoldSide::Unstable) {
        p = cfg.seed_offset * beta / nrm;
        q = cfg.seed_offset / nrm;
    } else {
        p = cfg.seed_offset * beta / nrm;
        q = 1.0 - cfg.seed_offset / nrm;
    }
    // Unperturbed time of flight from the seed to the section, by direct
    // integration of the pendulum factor.
    const double dir = side == ManifoldSide::Unstable ? +1.0 : -1.0;
    const Trajectory probe = integrate_unperturbed(
        m, State(I, phi, p, q), 0.0, dir * (cfg.T_asym + cfg.search_margin), cfg.integ);
    auto field = [&m](double, const State& z) { return unperturbed_field(m, z); };
    const auto crossings = section_crossings(probe, m.q_ref, field);
    if (crossings.empty())
        throw std::runtime_error("manifold shot: seed never reached the section q = q_ref");
    const double T_e = std::fabs(crossings.front().t);
    if (T_e > cfg.T_asym)
        throw std::runtime_error(
            "manifold shot: time of flight exceeds the T_asym budget; "
            "increase T_asym or the seed offset");
    SeedInfo info;
    info.time_of_flight = T_e;
    const double phase = side == ManifoldSide::Unstable ? phi - m.nu(I) * T_e
                                                        : phi + m.nu(I) * T_e;
    info.state = State(I, phase, p, q);
    return info;
}

}  // namespace

SectionPoint manifold_point(const ModelSpec& m, const NoisePath& path, double eps,
                            ManifoldSide side, double I, double phi, double t0,
                            const ManifoldShootConfig& cfg) {
    validate_shoot_config(m, cfg);
    const SeedInfo seed = make_seed(m, side, I, phi, cfg);
    const double dir = side == ManifoldSide::Unstable ? +1.0 : -1.0;
    const double t_a = t0 - dir * seed.time_of_flight;
    const double t_b = t0 + dir * cfg.search_margin;

    const Trajectory traj = integrate(m, path, eps, seed.state, t_a, t_b, cfg.integ);
    auto field = [&](double t, const State& z) {
        return eps == 0.0 ? unperturbed_field(m, z)
                          : perturbed_field(m, z, t, eps, path);
    };
    const auto crossings = section_crossings(traj, m.q_ref, field);
    if (crossings.empty())
        throw std::runtime_error("manifold shot: no section crossing within budget");

    const Crossing* best = &crossings.front();
    for (const auto& c : crossings)
        if (std::fabs(c.t - t0) < std::fabs(best->t - t0)) best = &c;

    SectionPoint out;
    out.state = best->state;
    out.t_cross = best->t;
    out.P = pendulum_energy(m, best->state.p, best->state.q);
    out.tau = (best->state.q - m.q_ref) / best->state.p;  // first-order offset
    out.elapsed_asymptotic = seed.time_of_flight;
    if (std::fabs(out.P) >= m.P_max)
        throw std::runtime_error("manifold shot: section point left the chart neighborhood");
    return out;
}

SplittingReport splitting_measured(const ModelSpec& m, const NoisePath& path, double eps,
                                   double I, double phi, double t0,
                                   const ManifoldShootConfig& cfg) {
    SplittingReport r;
    r.stable = manifold_point(m, path, eps, ManifoldSide::Stable, I, phi, t0, cfg);
    r.unstable = manifold_point(m, path, eps, ManifoldSide::Unstable, I, phi, t0, cfg);
    r.distance = r.stable.P - r.unstable.P;
    return r;
}

ActionChange action_change_measured(const ModelSpec& m, const NoisePath& path,
                                    double eps, double I, double phi, double t0,
                                    const ManifoldShootConfig& cfg) {
    validate_shoot_config(m, cfg);
    const SeedInfo seed = make_seed(m, ManifoldSide::Unstable, I, phi, cfg);
    const double T_e = seed.time_of_flight;
    const Trajectory traj =
        integrate(m, path, eps, seed.state, t0 - T_e, t0 + T_e, cfg.integ);

    auto window_mean = [&](double w0, double w1) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            if (traj.times[k] < w0 || traj.times[k] > w1) continue;
            acc += traj.states[k].I;
            ++count;
        }
        return acc / static_cast<double>(count);
    };
    // The perturbed exit has pendulum energy O(eps), so for P > 0 it re-enters
    // a further homoclinic excursion after ~2 ln(1/sqrt(P)) time units; the
    // action is frozen only near the closest approach to the saddle. Average
    // there, not at the window end.
    auto saddle_distance = [&](const State& z) {
        const double dq = std::min(z.q, 1.0 - z.q);
        return std::hypot(z.p, dq);
    };
    // First approach only: once the orbit leaves the saddle region again it is
    // inside the next scattering event, which must stay out of the average.
    double d_best = std::numeric_limits<double>::infinity();
    double t_quiet = traj.back_time();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] < t0 + 1.0) continue;
        const double d = saddle_distance(traj.states[k]);
        if (d < d_best) {
            d_best = d;
            t_quiet = traj.times[k];
        } else if (d_best < 0.05 && d > 3.0 * d_best) {
            break;
        }
    }
    ActionChange out;
    out.t_begin = t0 - T_e;
    out.t_end = t0 + T_e;
    out.I_minus = window_mean(out.t_begin, out.t_begin + 2.0);
    out.I_plus = window_mean(t_quiet - 1.0, std::min(t_quiet + 1.0, out.t_end));
    out.deltaI = out.I_plus - out.I_minus;
    return out;
}

MicroDiffusionReport micro_diffusion_demo(const ModelSpec& m, const NoisePath& path,
                                          double eps, double I, double phi, double v,
                                          double scan_t0, double scan_T,
                                          const SublinearityReport& admissible,
                                          const MelnikovConfig& mcfg,
                                          const ManifoldShootConfig& scfg) {
    const auto n = static_cast<std::size_t>(std::floor(scan_T / path.dt())) + 1;
    const MelnikovSeries series = melnikov_I_grid(m, path, I, phi, 0.0, scan_t0, n, mcfg);
    const std::vector<double> vals = series.plain_values();

    MicroDiffusionReport rep;
    rep.v = v;
    rep.eps_v = eps * v;
    rep.series_max = *std::max_element(vals.begin(), vals.end());
    const std::vector<double> crossings = find_level_crossings(series.times, vals, v);
    if (crossings.empty())
        throw std::runtime_error("micro-diffusion: level not crossed on the scanned window");

    for (double t_star : crossings) {
        ++rep.crossings_tried;
        if (!admissible.is_admissible(t_star)) continue;
        rep.t_crossing = t_star;
        const ActionChange ac = action_change_measured(m, path, eps, I, phi, t_star, scfg);
        rep.deltaI = ac.deltaI;
        rep.rel_error = std::fabs(ac.deltaI - rep.eps_v) / std::fabs(rep.eps_v);
        return rep;
    }
    throw std::runtime_error(
        "micro-diffusion: no admissible anchor among the level crossings");
}

}  // namespace rotopend
