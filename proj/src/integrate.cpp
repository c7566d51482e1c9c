#include "rotopend/integrate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rotopend {

void Trajectory::write_csv(const std::string& filename, std::size_t stride) const {
    std::FILE* f = std::fopen(filename.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + filename + " for writing");
    const bool with_jac = !jacobians.empty();
    std::fprintf(f, "t,I,phi,p,q");
    if (with_jac)
        for (int r = 1; r <= 4; ++r)
            for (int c = 1; c <= 4; ++c) std::fprintf(f, ",j%d%d", r, c);
    std::fprintf(f, "\n");
    if (stride == 0) stride = 1;
    for (std::size_t k = 0; k < times.size(); k += stride) {
        const State& z = states[k];
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g", times[k], z.I, z.phi, z.p, z.q);
        if (with_jac)
            for (double x : jacobians[k].m) std::fprintf(f, ",%.17g", x);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

namespace {

// RK4 on the joint system (z, xi) with xi' = Df(t, z) xi. Field and its
// z-derivative are supplied as callables; the Jacobian leg is skipped unless
// requested.
template <class Field, class FieldJac>
Trajectory run_rk4(Field&& field, FieldJac&& field_jac, const State& z0, double t0,
                   double t1, double h_mag, bool variational) {
    if (!(h_mag > 0)) throw std::invalid_argument("integrator step must be positive");
    const double span = t1 - t0;
    const double dir = span >= 0 ? 1.0 : -1.0;
    const std::size_t n_steps =
        span == 0 ? 0 : static_cast<std::size_t>(std::ceil(std::fabs(span) / h_mag - 1e-12));

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    if (variational) traj.jacobians.reserve(n_steps + 1);

    Vec4 z = z0.as_vec();
    Mat4 xi = Mat4::identity();
    double t = t0;
    traj.times.push_back(t);
    traj.states.push_back(z0);
    if (variational) traj.jacobians.push_back(xi);

    for (std::size_t k = 0; k < n_steps; ++k) {
        double h = dir * h_mag;
        if (k + 1 == n_steps) h = t1 - t;  // exact final step

        const State s1 = State::from_vec(z);
        const Vec4 k1 = field(t, s1);
        const State s2 = State::from_vec(z + (0.5 * h) * k1);
        const Vec4 k2 = field(t + 0.5 * h, s2);
        const State s3 = State::from_vec(z + (0.5 * h) * k2);
        const Vec4 k3 = field(t + 0.5 * h, s3);
        const State s4 = State::from_vec(z + h * k3);
        const Vec4 k4 = field(t + h, s4);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (variational) {
            const Mat4 j1 = field_jac(t, s1) * xi;
            const Mat4 j2 = field_jac(t + 0.5 * h, s2) * (xi + (0.5 * h) * j1);
            const Mat4 j3 = field_jac(t + 0.5 * h, s3) * (xi + (0.5 * h) * j2);
            const Mat4 j4 = field_jac(t + h, s4) * (xi + h * j3);
            xi += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        }

        t = (k + 1 == n_steps) ? t1 : t0 + dir * h_mag * static_cast<double>(k + 1);
        for (double x : z.v)
            if (!std::isfinite(x))
                throw std::runtime_error("integration produced a non-finite state");

        traj.times.push_back(t);
        traj.states.push_back(State::from_vec(z));
        if (variational) traj.jacobians.push_back(xi);
    }
    return traj;
}

void check_noise_window(const NoisePath& path, double t0, double t1, double h) {
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    if (!path.contains(lo) || !path.contains(hi))
        throw std::out_of_range("integration window exceeds the noise path domain");
    if (h > path.dt() * (1.0 + 1e-12))
        throw std::invalid_argument("integrator step exceeds the noise grid dt");
}

}  // namespace

Trajectory integrate(const ModelSpec& m, const NoisePath& path, double eps,
                     const State& z0, double t0, double t1, const IntegratorConfig& cfg) {
    if (eps == 0.0) return integrate_unperturbed(m, z0, t0, t1, cfg);
    check_noise_window(path, t0, t1, cfg.h);
    auto field = [&](double t, const State& z) {
        return unperturbed_field(m, z) + (eps * path.evaluate(t)) * perturbation_field(m, z);
    };
    auto jac = [&](double t, const State& z) {
        return unperturbed_field_jacobian(m, z) +
               (eps * path.evaluate(t)) * perturbation_field_jacobian(m, z);
    };
    return run_rk4(field, jac, z0, t0, t1, cfg.h, cfg.variational);
}

Trajectory integrate_unperturbed(const ModelSpec& m, const State& z0, double t0,
                                 double t1, const IntegratorConfig& cfg) {
    auto field = [&](double, const State& z) { return unperturbed_field(m, z); };
    auto jac = [&](double, const State& z) { return unperturbed_field_jacobian(m, z); };
    return run_rk4(field, jac, z0, t0, t1, cfg.h, cfg.variational);
}

Trajectory integrate_modified(const ModelSpec& m, const NoisePath& path, double eps,
                              const BumpSpec& bump, const State& z0, double t0,
                              double t1, const IntegratorConfig& cfg) {
    if (eps == 0.0) return integrate_unperturbed(m, z0, t0, t1, cfg);
    check_noise_window(path, t0, t1, cfg.h);
    // The bump is anchored at the initial time: psi(s, theta^{t0} omega).
    const BumpEvaluator psi(path.shifted(t0), bump);
    auto field = [&](double t, const State& z) {
        const double factor = eps * psi(t - t0) * path.evaluate(t);
        return unperturbed_field(m, z) + factor * perturbation_field(m, z);
    };
    auto jac = [&](double t, const State& z) {
        const double factor = eps * psi(t - t0) * path.evaluate(t);
        return unperturbed_field_jacobian(m, z) + factor * perturbation_field_jacobian(m, z);
    };
    return run_rk4(field, jac, z0, t0, t1, cfg.h, cfg.variational);
}

Trajectory integrate_variational(const ModelSpec& m, const NoisePath& path, double eps,
                                 const State& z0, double t0, double t1,
                                 IntegratorConfig cfg) {
    cfg.variational = true;
    return integrate(m, path, eps, z0, t0, t1, cfg);
}

FlowDistance flow_distance(const ModelSpec& m, const NoisePath& path, double eps,
                           const BumpSpec& bump, const State& z0, double t0,
                           const IntegratorConfig& cfg) {
    IntegratorConfig vc = cfg;
    vc.variational = true;
    const double t1 = t0 + 1.0;
    const Trajectory pert = integrate_modified(m, path, eps, bump, z0, t0, t1, vc);
    const Trajectory free = integrate_unperturbed(m, z0, t0, t1, vc);

    FlowDistance d;
    for (std::size_t k = 0; k < pert.times.size(); ++k) {
        d.c0 = std::max(d.c0, state_distance(pert.states[k], free.states[k]));
        d.jac_diff = std::max(d.jac_diff, (pert.jacobians[k] - free.jacobians[k]).frobenius_norm());
        d.jac0_sup = std::max(d.jac0_sup, free.jacobians[k].frobenius_norm());
    }
    d.c1 = d.c0 + d.jac_diff;
    const std::size_t i0 = path.node_at_or_after(t0);
    const std::size_t i1 = path.node_at_or_before(t1);
    for (std::size_t i = i0; i <= i1; ++i)
        d.noise_sup = std::max(d.noise_sup, std::fabs(path.values()[i]));
    d.noise_sup = std::max({d.noise_sup, std::fabs(path.evaluate(t0)), std::fabs(path.evaluate(t1))});
    return d;
}

}  // namespace rotopend
