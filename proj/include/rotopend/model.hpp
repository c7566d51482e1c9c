#ifndef ROTOPEND_MODEL_HPP
#define ROTOPEND_MODEL_HPP

#include <functional>
#include <string>
#include <utility>

#include "rotopend/linalg.hpp"
#include "rotopend/noise_path.hpp"

namespace rotopend {

// Phase-space point z = (I, phi, p, q); both angles live on the unit circle
// and are reduced mod 1 on construction.
struct State {
    double I = 0, phi = 0, p = 0, q = 0;

    State() = default;
    State(double I_, double phi_, double p_, double q_);

    Vec4 as_vec() const { return Vec4{{I, phi, p, q}}; }
    static State from_vec(const Vec4& v) { return State(v[0], v[1], v[2], v[3]); }
};

double wrap_unit(double x);

// Distance on R x T x R x T (angle differences wrapped to [-1/2, 1/2]).
double state_distance(const State& a, const State& b);

// Rotator-pendulum system H0 = h0(I) + p^2/2 + V(q) with perturbation
// Hamiltonian H1. V is 1-periodic with a non-degenerate maximum at q = 0
// (V'(0)=0, V''(0)<0); H1 and its gradient vanish on p = q = 0 so the
// rotator cylinder stays invariant under the perturbed flow.
struct ModelSpec {
    std::string id;

    std::function<double(double)> h0, nu, dnu;  // h0, h0', h0''
    std::function<double(double)> V, dV, d2V;

    std::function<double(const State&)> H1;
    std::function<Vec4(const State&)> gradH1;  // order (I, phi, p, q)
    std::function<Mat4(const State&)> hessH1;

    double beta = 1.0;  // sqrt(-V''(0)), hyperbolic rate of the saddle

    // Neighborhood for the (P, tau) chart, away from critical points of P.
    double P_min = -0.02, P_max = 0.02;
    double q_min = 0.02, q_max = 0.98;
    double q_ref = 0.5;  // reference position for tau

    bool has_closed_form_separatrix = false;
};

// h0(I)=I^2/2, V(q)=(cos 2 pi q - 1)/(4 pi^2), H1 = p^2 cos(2 pi phi).
// beta = 1, separatrix q0(t) = (2/pi) atan e^t, p0(t) = sech(t)/pi.
ModelSpec default_model();
ModelSpec model_from_id(const std::string& id);

double hamiltonian0(const ModelSpec& m, const State& z);
double pendulum_energy(const ModelSpec& m, double p, double q);

// (I', phi', p', q') = (0, nu(I), -V'(q), p)
Vec4 unperturbed_field(const ModelSpec& m, const State& z);
Mat4 unperturbed_field_jacobian(const ModelSpec& m, const State& z);

// J grad H1 and its z-derivative (the noise factor is applied by callers).
Vec4 perturbation_field(const ModelSpec& m, const State& z);
Mat4 perturbation_field_jacobian(const ModelSpec& m, const State& z);

// Unperturbed field plus eps * omega(t) * J grad H1. Requires t in the path
// domain when eps != 0.
Vec4 perturbed_field(const ModelSpec& m, const State& z, double t, double eps,
                     const NoisePath& path);

struct SeparatrixPoint {
    double tau = 0;
    double p0 = 0;
    double q0 = 0;
};

// Point of the pendulum homoclinic orbit at parameter tau (tau = 0 at
// q = q_ref). Closed form for the default model, seeded integration from
// the saddle eigenvector otherwise.
SeparatrixPoint separatrix(const ModelSpec& m, double tau);

// {P, H1} = V'(q) dH1/dp - p dH1/dq
double poisson_P_H1(const ModelSpec& m, const State& z);
// {I, H1} = -dH1/dphi
double poisson_I_H1(const ModelSpec& m, const State& z);

// Canonical pendulum chart (p,q) -> (P, tau): P is the pendulum energy,
// tau the signed time of flight from q_ref along the level set (sign of the
// reference momentum matched to sign of p). Point must lie in the
// neighborhood above.
std::pair<double, double> pendulum_coords(const ModelSpec& m, double p, double q,
                                          double time_budget = 50.0);

struct H1ConditionReport {
    double max_abs_H1 = 0;
    double max_grad_norm = 0;
    bool holds = false;  // both below 1e-12 on the scanned grid
};

// Scans |H1| and |grad H1| at p = q = 0 over a grid of (I, phi).
H1ConditionReport check_H1_condition(const ModelSpec& m, double I_lo = -2.0,
                                     double I_hi = 2.0, int grid = 32);

}  // namespace rotopend

#endif
