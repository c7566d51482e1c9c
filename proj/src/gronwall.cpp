#include "rotopend/gronwall.hpp"

#include <cmath>
#include <stdexcept>

#include "rotopend/rng.hpp"

namespace rotopend {

namespace {
void require_nonnegative(std::initializer_list<double> xs) {
    for (double x : xs)
        if (x < 0) throw std::invalid_argument("gronwall bound: negative coefficient");
}
}  // namespace

double gronwall_bound_I(double d0, double d1, double d2, double d3, double t) {
    require_nonnegative({d0, d1, d2, d3, t});
    return (d0 + d1 * t + d2 * t * t) * std::exp(d3 * t);
}

double gronwall_bound_II(double d0, double d1, double d2, double d3, double d4,
                         double t) {
    require_nonnegative({d0, d1, d2, d3, d4, t});
    return (d0 + d1 * t + d2 * t * t) * std::exp(d3 * t + 0.5 * d4 * t * t);
}

double gronwall_bound_III(double C0, double C1, double C2, double C3, double eps,
                          double rho1, double k, double t) {
    require_nonnegative({C0, C1, C2, C3, t});
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("gronwall III: eps in (0,1)");
    if (!(rho1 > 0 && rho1 < 1)) throw std::invalid_argument("gronwall III: rho1 in (0,1)");
    if (C3 > 0 && k > (1.0 - rho1) / C3)
        throw std::invalid_argument("gronwall III: k exceeds (1 - rho1)/C3");
    if (t > k * std::log(1.0 / eps) * (1.0 + 1e-12))
        throw std::invalid_argument("gronwall III: t outside the validity window");
    return eps * (C0 + C1 * t + 0.5 * C2 * t * t) * std::exp(C3 * t);
}

GronwallConstants estimate_gronwall_constants(const ModelSpec& m, double I_center,
                                              std::uint64_t seed, int n_samples,
                                              double margin) {
    SplitMix64 rng(seed);
    auto sample_state = [&]() {
        for (;;) {
            const double I = I_center - 1.0 + 2.0 * rng.next_unit();
            const double phi = rng.next_unit();
            const double q = rng.next_unit();
            const double p = -0.6 + 1.2 * rng.next_unit();
            if (const double P = pendulum_energy(m, p, q); P >= -0.1 && P <= 0.1)
                return State(I, phi, p, q);
        }
    };

    GronwallConstants c;
    State prev = sample_state();
    Mat4 prev_jac = unperturbed_field_jacobian(m, prev);
    for (int i = 0; i < n_samples; ++i) {
        const State z = sample_state();
        const Mat4 j0 = unperturbed_field_jacobian(m, z);
        c.K1 = std::max(c.K1, j0.frobenius_norm());
        c.K2 = std::max(c.K2, perturbation_field(m, z).norm());
        c.K2p = std::max(c.K2p, perturbation_field_jacobian(m, z).frobenius_norm());
        const double dist = state_distance(z, prev);
        if (dist > 1e-8)
            c.K1p = std::max(c.K1p, (j0 - prev_jac).frobenius_norm() / dist);
        prev = z;
        prev_jac = j0;
    }
    c.K1 *= margin;
    c.K2 *= margin;
    c.K1p *= margin;
    c.K2p *= margin;
    return c;
}

GronwallCheck check_flow_distance_bounds(const GronwallConstants& c, double eps,
                                         const FlowDistance& d) {
    const double A = d.noise_sup;
    const double K3 = d.jac0_sup;
    GronwallCheck out;
    // State leg: phi(t) <= eps K2 A t + K1 int phi.
    out.state_bound = gronwall_bound_I(0.0, eps * c.K2 * A, 0.0, c.K1, 1.0);
    // Jacobian leg: the inhomogeneity collects the direct perturbation term
    // eps K2p K3 A t and the state-distance feedback through Lip(DX0).
    const double g0 = eps * c.K2 * A * std::exp(c.K1);  // state distance <= g0 * t
    const double d1 = eps * c.K2p * K3 * A;
    const double d2 = 0.5 * c.K1p * K3 * g0;
    const double d3 = c.K1 + eps * c.K2p * A;
    out.jac_bound = gronwall_bound_II(0.0, d1, d2, d3, 0.0, 1.0);
    out.state_ok = d.c0 <= out.state_bound;
    out.jac_ok = d.jac_diff <= out.jac_bound;
    out.ok = out.state_ok && out.jac_ok;
    return out;
}

}  // namespace rotopend
