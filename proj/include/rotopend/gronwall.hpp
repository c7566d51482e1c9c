#ifndef ROTOPEND_GRONWALL_HPP
#define ROTOPEND_GRONWALL_HPP

#include <cstdint>

#include "rotopend/integrate.hpp"
#include "rotopend/model.hpp"

namespace rotopend {

// (d0 + d1 t + d2 t^2) e^{d3 t}
double gronwall_bound_I(double d0, double d1, double d2, double d3, double t);

// (d0 + d1 t + d2 t^2) e^{d3 t + d4 t^2 / 2}
double gronwall_bound_II(double d0, double d1, double d2, double d3, double d4,
                         double t);

// eps (C0 + C1 t + (C2/2) t^2) e^{C3 t}, valid for t <= k ln(1/eps) with
// k <= (1 - rho1)/C3; this is the explicit form behind the K eps^{rho1} bound.
double gronwall_bound_III(double C0, double C1, double C2, double C3, double eps,
                          double rho1, double k, double t);

// Lipschitz/sup constants of the field pieces over the compact domain
// |I - I_center| <= 1, P in [-0.1, 0.1], estimated by sampling and inflated
// by a fixed safety margin.
struct GronwallConstants {
    double K1 = 0;   // sup ||D(J grad H0)||_F, Lipschitz bound for the field
    double K2 = 0;   // sup ||J grad H1||
    double K1p = 0;  // Lipschitz bound for D(J grad H0)
    double K2p = 0;  // sup ||D(J grad H1)||_F
};

GronwallConstants estimate_gronwall_constants(const ModelSpec& m, double I_center,
                                              std::uint64_t seed, int n_samples = 10000,
                                              double margin = 1.25);

struct GronwallCheck {
    double state_bound = 0;  // Gronwall-I bound for the state distance at t = 1
    double jac_bound = 0;    // Gronwall-II bound for the Jacobian distance at t = 1
    bool state_ok = false;
    bool jac_ok = false;
    bool ok = false;
};

// Asserts the appendix inequalities on a measured flow_distance: the state
// distance against Gronwall-I and the Jacobian distance against Gronwall-II,
// with the window's own noise sup standing in for the envelope intercept.
GronwallCheck check_flow_distance_bounds(const GronwallConstants& c, double eps,
                                         const FlowDistance& d);

}  // namespace rotopend

#endif
