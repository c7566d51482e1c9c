#include "rotopend/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rotopend {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

double sech(double x) {
    // 2 e^{-|x|} / (1 + e^{-2|x|}), safe for large |x|
    const double e = std::exp(-std::fabs(x));
    return 2.0 * e / (1.0 + e * e);
}
}  // namespace

double wrap_unit(double x) {
    double w = x - std::floor(x);
    if (w >= 1.0) w = 0.0;  // guards the x = -1e-17 edge
    return w;
}

State::State(double I_, double phi_, double p_, double q_)
    : I(I_), phi(wrap_unit(phi_)), p(p_), q(wrap_unit(q_)) {}

double state_distance(const State& a, const State& b) {
    auto angle_diff = [](double x, double y) {
        double d = wrap_unit(x - y);
        if (d > 0.5) d = 1.0 - d;
        return d;
    };
    const double di = a.I - b.I;
    const double dphi = angle_diff(a.phi, b.phi);
    const double dp = a.p - b.p;
    const double dq = angle_diff(a.q, b.q);
    return std::sqrt(di * di + dphi * dphi + dp * dp + dq * dq);
}

ModelSpec default_model() {
    ModelSpec m;
    m.id = "default";
    m.h0 = [](double I) { return 0.5 * I * I; };
    m.nu = [](double I) { return I; };
    m.dnu = [](double) { return 1.0; };
    m.V = [](double q) { return (std::cos(kTwoPi * q) - 1.0) / (kTwoPi * kTwoPi); };
    m.dV = [](double q) { return -std::sin(kTwoPi * q) / kTwoPi; };
    m.d2V = [](double q) { return -std::cos(kTwoPi * q); };
    m.H1 = [](const State& z) { return z.p * z.p * std::cos(kTwoPi * z.phi); };
    m.gradH1 = [](const State& z) {
        const double c = std::cos(kTwoPi * z.phi);
        const double s = std::sin(kTwoPi * z.phi);
        return Vec4{{0.0, -kTwoPi * z.p * z.p * s, 2.0 * z.p * c, 0.0}};
    };
    m.hessH1 = [](const State& z) {
        const double c = std::cos(kTwoPi * z.phi);
        const double s = std::sin(kTwoPi * z.phi);
        Mat4 h;
        h(1, 1) = -kTwoPi * kTwoPi * z.p * z.p * c;
        h(1, 2) = h(2, 1) = -2.0 * kTwoPi * z.p * s;
        h(2, 2) = 2.0 * c;
        return h;
    };
    m.beta = 1.0;
    m.has_closed_form_separatrix = true;
    return m;
}

ModelSpec model_from_id(const std::string& id) {
    if (id == "default") return default_model();
    throw std::invalid_argument("unknown model id: " + id);
}

double hamiltonian0(const ModelSpec& m, const State& z) {
    return m.h0(z.I) + 0.5 * z.p * z.p + m.V(z.q);
}

double pendulum_energy(const ModelSpec& m, double p, double q) {
    return 0.5 * p * p + m.V(q);
}

Vec4 unperturbed_field(const ModelSpec& m, const State& z) {
    return Vec4{{0.0, m.nu(z.I), -m.dV(z.q), z.p}};
}

Mat4 unperturbed_field_jacobian(const ModelSpec& m, const State& z) {
    Mat4 j;
    j(1, 0) = m.dnu(z.I);
    j(2, 3) = -m.d2V(z.q);
    j(3, 2) = 1.0;
    return j;
}

Vec4 perturbation_field(const ModelSpec& m, const State& z) {
    const Vec4 g = m.gradH1(z);  // (H1_I, H1_phi, H1_p, H1_q)
    return Vec4{{-g[1], g[0], -g[3], g[2]}};
}

Mat4 perturbation_field_jacobian(const ModelSpec& m, const State& z) {
    const Mat4 h = m.hessH1(z);
    Mat4 j;
    for (int c = 0; c < 4; ++c) {
        j(0, c) = -h(1, c);
        j(1, c) = h(0, c);
        j(2, c) = -h(3, c);
        j(3, c) = h(2, c);
    }
    return j;
}

Vec4 perturbed_field(const ModelSpec& m, const State& z, double t, double eps,
                     const NoisePath& path) {
    Vec4 f = unperturbed_field(m, z);
    if (eps != 0.0) f += (eps * path.evaluate(t)) * perturbation_field(m, z);
    return f;
}

namespace {

// Minimal RK4 for the planar pendulum (p, q), used by the chart and the
// numeric separatrix fallback. Returns the state after time span (can be
// negative).
struct PQ {
    double p, q;
};

PQ pendulum_rk4(const ModelSpec& m, PQ z, double span, double h0 = 1e-3) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(span) / h0)));
    const double h = span / n;
    auto f = [&](const PQ& s) { return PQ{-m.dV(s.q), s.p}; };
    for (int i = 0; i < n; ++i) {
        const PQ k1 = f(z);
        const PQ k2 = f({z.p + 0.5 * h * k1.p, z.q + 0.5 * h * k1.q});
        const PQ k3 = f({z.p + 0.5 * h * k2.p, z.q + 0.5 * h * k2.q});
        const PQ k4 = f({z.p + h * k3.p, z.q + h * k3.q});
        z.p += h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        z.q += h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    }
    return z;
}

// First time (searching in direction sign(dir)) at which q crosses q_ref
// with sign(p) == sign_p. Returns false if not reached within budget.
bool pendulum_time_to_ref(const ModelSpec& m, PQ z, double q_ref, int sign_p,
                          double dir, double budget, double* elapsed_out) {
    const double h = 1e-3 * (dir < 0 ? -1.0 : 1.0);
    double t = 0.0;
    PQ prev = z;
    const int max_steps = static_cast<int>(budget / 1e-3) + 1;
    for (int i = 0; i < max_steps; ++i) {
        PQ next = pendulum_rk4(m, prev, h);
        const double a = prev.q - q_ref, b = next.q - q_ref;
        if ((a == 0.0 || a * b < 0.0) && std::fabs(next.q - prev.q) < 0.5) {
            // Newton on the cubic Hermite interpolant of q(t).
            double theta = a / (a - b);
            for (int it = 0; it < 40; ++it) {
                const double h00 = (1 + 2 * theta) * (1 - theta) * (1 - theta);
                const double h10 = theta * (1 - theta) * (1 - theta);
                const double h01 = theta * theta * (3 - 2 * theta);
                const double h11 = theta * theta * (theta - 1);
                const double qv = h00 * prev.q + h10 * h * prev.p + h01 * next.q +
                                  h11 * h * next.p - q_ref;
                const double d00 = 6 * theta * (theta - 1);
                const double d10 = (1 - theta) * (1 - 3 * theta);
                const double d01 = -d00;
                const double d11 = theta * (3 * theta - 2);
                const double dq = d00 * prev.q + d10 * h * prev.p + d01 * next.q +
                                  d11 * h * next.p;
                if (dq == 0.0) break;
                const double step = qv / dq;
                theta -= step;
                if (std::fabs(step) < 1e-15) break;
            }
            const double pc = prev.p + theta * (next.p - prev.p);
            if (sign_p == 0 || (pc > 0) == (sign_p > 0)) {
                *elapsed_out = t + theta * h;
                return true;
            }
        }
        prev = next;
        t += h;
        if (std::fabs(t) > budget) break;
    }
    return false;
}

}  // namespace

SeparatrixPoint separatrix(const ModelSpec& m, double tau) {
    if (m.has_closed_form_separatrix) {
        SeparatrixPoint s;
        s.tau = tau;
        s.p0 = sech(tau) / kPi;
        s.q0 = (2.0 / kPi) * std::atan(std::exp(tau));
        if (!std::isfinite(s.q0)) s.q0 = tau > 0 ? 1.0 : 0.0;
        return s;
    }
    // Numeric fallback: shoot from the unstable eigenvector near the saddle,
    // anchor tau = 0 at the q_ref crossing, then flow for tau.
    const double d0 = 1e-9;
    const double nrm = std::sqrt(1.0 + m.beta * m.beta);
    PQ z{d0 * m.beta / nrm, d0 / nrm};
    double to_ref = 0;
    if (!pendulum_time_to_ref(m, z, m.q_ref, +1, +1.0, 200.0, &to_ref))
        throw std::runtime_error("separatrix fallback: never reached q_ref");
    PQ at_ref = pendulum_rk4(m, z, to_ref);
    PQ out = pendulum_rk4(m, at_ref, tau);
    return SeparatrixPoint{tau, out.p, wrap_unit(out.q)};
}

double poisson_P_H1(const ModelSpec& m, const State& z) {
    const Vec4 g = m.gradH1(z);
    return m.dV(z.q) * g[2] - z.p * g[3];
}

double poisson_I_H1(const ModelSpec& m, const State& z) {
    return -m.gradH1(z)[1];
}

std::pair<double, double> pendulum_coords(const ModelSpec& m, double p, double q,
                                          double time_budget) {
    const double P = pendulum_energy(m, p, q);
    const double qw = wrap_unit(q);
    if (!(P > m.P_min && P < m.P_max && qw > m.q_min && qw < m.q_max)) {
        std::ostringstream msg;
        msg << "pendulum_coords: point (p=" << p << ", q=" << qw
            << ", P=" << P << ") outside the chart neighborhood";
        throw std::domain_error(msg.str());
    }
    const int sign_p = p >= 0 ? +1 : -1;
    double fwd = 0, bwd = 0;
    const bool has_fwd =
        pendulum_time_to_ref(m, {p, qw}, m.q_ref, sign_p, +1.0, time_budget, &fwd);
    const bool has_bwd =
        pendulum_time_to_ref(m, {p, qw}, m.q_ref, sign_p, -1.0, time_budget, &bwd);
    if (!has_fwd && !has_bwd)
        throw std::runtime_error("pendulum_coords: level set never reaches q_ref in budget");
    double elapsed;
    if (has_fwd && has_bwd)
        elapsed = std::fabs(fwd) <= std::fabs(bwd) ? fwd : bwd;
    else
        elapsed = has_fwd ? fwd : bwd;
    // elapsed flows the point onto the reference; tau is the reverse leg.
    return {P, -elapsed};
}

H1ConditionReport check_H1_condition(const ModelSpec& m, double I_lo, double I_hi,
                                     int grid) {
    H1ConditionReport r;
    for (int i = 0; i < grid; ++i) {
        const double I = I_lo + (I_hi - I_lo) * (i + 0.5) / grid;
        for (int j = 0; j < grid; ++j) {
            const double phi = static_cast<double>(j) / grid;
            const State z(I, phi, 0.0, 0.0);
            r.max_abs_H1 = std::max(r.max_abs_H1, std::fabs(m.H1(z)));
            r.max_grad_norm = std::max(r.max_grad_norm, m.gradH1(z).norm());
        }
    }
    r.holds = r.max_abs_H1 < 1e-12 && r.max_grad_norm < 1e-12;
    return r;
}

}  // namespace rotopend
