#ifndef ROTOPEND_INTEGRATE_HPP
#define ROTOPEND_INTEGRATE_HPP

#include <string>
#include <vector>

#include "rotopend/linalg.hpp"
#include "rotopend/model.hpp"
#include "rotopend/noise_diagnostics.hpp"
#include "rotopend/noise_path.hpp"

namespace rotopend {

struct IntegratorConfig {
    double h = 1e-3;           // fixed RK4 step; must not exceed the noise grid dt
    bool variational = false;  // co-integrate the 4x4 linearization
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Mat4> jacobians;  // present iff variational was requested

    const State& back_state() const { return states.back(); }
    double back_time() const { return times.back(); }

    // Columns t,I,phi,p,q[,j11..j44]; one row per `stride` steps.
    void write_csv(const std::string& filename, std::size_t stride = 1) const;
};

// Fixed-step RK4 for the path-wise system z' = X0(z) + eps w(t) J grad H1(z)
// from t0 to t1 (either direction; the last partial step is shortened
// exactly). When eps != 0 the whole window must lie in the path domain.
Trajectory integrate(const ModelSpec& m, const NoisePath& path, double eps,
                     const State& z0, double t0, double t1,
                     const IntegratorConfig& cfg = {});

// eps = 0 specialization that needs no noise path.
Trajectory integrate_unperturbed(const ModelSpec& m, const State& z0, double t0,
                                 double t1, const IntegratorConfig& cfg = {});

// Same field with H1 replaced by psi(t) H1, psi the random bump anchored at
// the initial time t0 (psi depends on time only, so it multiplies the
// z-gradient).
Trajectory integrate_modified(const ModelSpec& m, const NoisePath& path, double eps,
                              const BumpSpec& bump, const State& z0, double t0,
                              double t1, const IntegratorConfig& cfg = {});

// Convenience wrapper forcing cfg.variational.
Trajectory integrate_variational(const ModelSpec& m, const NoisePath& path, double eps,
                                 const State& z0, double t0, double t1,
                                 IntegratorConfig cfg = {});

struct FlowDistance {
    double c0 = 0;        // sup state distance over the unit window
    double c1 = 0;        // c0 plus sup Jacobian difference (Frobenius)
    double jac_diff = 0;  // sup Jacobian difference alone
    double noise_sup = 0; // max |omega| over the window (enters the Gronwall guard)
    double jac0_sup = 0;  // max ||Jacobian of the unperturbed flow||_F
};

// C^0/C^1 distance between the bump-modified perturbed flow and the
// unperturbed flow over [t0, t0 + 1].
FlowDistance flow_distance(const ModelSpec& m, const NoisePath& path, double eps,
                           const BumpSpec& bump, const State& z0, double t0,
                           const IntegratorConfig& cfg = {});

}  // namespace rotopend

#endif
