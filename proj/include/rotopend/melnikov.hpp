#ifndef ROTOPEND_MELNIKOV_HPP
#define ROTOPEND_MELNIKOV_HPP

#include <functional>
#include <span>
#include <vector>

#include "rotopend/integrate.hpp"
#include "rotopend/model.hpp"
#include "rotopend/noise_diagnostics.hpp"
#include "rotopend/noise_path.hpp"

namespace rotopend {

struct MelnikovConfig {
    double S = 40.0;         // truncation half-width of the improper integral
    double tol = 1e-8;       // certified tail bound must stay below this
    double envelope_B = 0.1; // slope used in the tail certificate
};

struct MelnikovValue {
    double value = 0;
    double truncation_bound = 0;
    double quad_error_estimate = 0;
};

// The deterministic factor of a Melnikov integrand along the homoclinic
// orbit, with analytic s-derivative (chain rule through the separatrix ODE).
struct HomoclinicKernel {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    double decay_rate = 1.0;  // exponential envelope rate for tail bounds
};

// {P, H1}(I, phi + nu(I) s, p0(tau+s), q0(tau+s))
HomoclinicKernel energy_bracket_kernel(const ModelSpec& m, double I, double phi,
                                       double tau);
// {I, H1} along the homoclinic minus its footpoint value at p = q = 0
HomoclinicKernel action_bracket_kernel(const ModelSpec& m, double I, double phi,
                                       double tau);

// Integral of kernel(t - t_eval) * omega(t) over [t_eval - S, t_eval + S].
// Quadrature nodes are snapped to the path grid and the rule is exact for the
// path's piecewise-linear interpolant (3-point Gauss-Legendre per segment);
// the error estimate compares against the 2-point rule.
double homoclinic_noise_integral(const HomoclinicKernel& kernel, const NoisePath& path,
                                 double t_eval, double S, double* quad_error = nullptr);

MelnikovValue melnikov_P(const ModelSpec& m, const NoisePath& path, double I,
                         double phi, double tau, double t_eval,
                         const MelnikovConfig& cfg = {});
MelnikovValue melnikov_I(const ModelSpec& m, const NoisePath& path, double I,
                         double phi, double tau, double t_eval,
                         const MelnikovConfig& cfg = {});

struct MelnikovSeries {
    std::vector<double> times;
    std::vector<MelnikovValue> values;

    std::vector<double> plain_values() const;
};

// Evaluates the Melnikov process on n consecutive path nodes starting at the
// node nearest t_start (which must lie on the grid) via FFT cross-correlation;
// pointwise identical summands to the direct evaluator.
MelnikovSeries melnikov_P_grid(const ModelSpec& m, const NoisePath& path, double I,
                               double phi, double tau, double t_start, std::size_t n,
                               const MelnikovConfig& cfg = {});
MelnikovSeries melnikov_I_grid(const ModelSpec& m, const NoisePath& path, double I,
                               double phi, double tau, double t_start, std::size_t n,
                               const MelnikovConfig& cfg = {});

// |M^P(I,phi,tau,t) - M^P(I,phi+nu(I)s, tau+s, t+s)|
double time_invariance_residual(const ModelSpec& m, const NoisePath& path, double I,
                                double phi, double tau, double t_eval, double sigma,
                                const MelnikovConfig& cfg = {});

struct SeriesZero {
    double t = 0;
    double slope = 0;
};

struct ZeroScan {
    std::vector<SeriesZero> zeros;
    int flagged_degenerate = 0;  // sign changes whose local slope fell below threshold
};

// Sign-change bracketing with local cubic refinement. Zeros with |slope|
// below the degeneracy threshold are flagged, not returned.
ZeroScan find_zeros(std::span<const double> times, std::span<const double> values,
                    double degeneracy_threshold = 1e-6);
ZeroScan find_zeros(const MelnikovSeries& series, double degeneracy_threshold = 1e-6);

std::vector<double> find_level_crossings(std::span<const double> times,
                                         std::span<const double> values, double level);

enum class ManifoldSide { Stable, Unstable };

struct ManifoldShootConfig {
    double T_asym = 15.0;       // budget for the asymptotic leg, >= 15/beta
    double seed_offset = 1e-6;  // eigenvector displacement from the saddle
    double search_margin = 8.0; // how far past t0 to look for the section crossing
    IntegratorConfig integ{};
};

struct SectionPoint {
    State state;                // at the section q = q_ref
    double t_cross = 0;
    double P = 0;
    double tau = 0;
    double elapsed_asymptotic = 0;  // measured unperturbed time of flight
};

// Shoots the perturbed stable/unstable manifold of the rotator cylinder onto
// the section q = q_ref: displace from the saddle along the matching
// eigenvector, start at t0 -/+ the unperturbed time of flight (so the
// unperturbed crossing lands exactly at t0), integrate to the crossing
// nearest t0. Requires (H1), which keeps the cylinder exactly invariant.
SectionPoint manifold_point(const ModelSpec& m, const NoisePath& path, double eps,
                            ManifoldSide side, double I, double phi, double t0,
                            const ManifoldShootConfig& cfg = {});

struct SplittingReport {
    SectionPoint stable;
    SectionPoint unstable;
    double distance = 0;  // P(stable) - P(unstable)
};

// D(eps) = P(stable section point) - P(unstable section point) at matched
// graph coordinates; first order -eps * M^P.
SplittingReport splitting_measured(const ModelSpec& m, const NoisePath& path, double eps,
                                   double I, double phi, double t0,
                                   const ManifoldShootConfig& cfg = {});

struct ActionChange {
    double deltaI = 0;
    double I_minus = 0;
    double I_plus = 0;
    double t_begin = 0, t_end = 0;
};

// One homoclinic transition from the unstable seed through the section;
// I_minus/I_plus average the action over the first/last 10% of the window
// (exponentially close to the invariant cylinder, where I is frozen).
ActionChange action_change_measured(const ModelSpec& m, const NoisePath& path,
                                    double eps, double I, double phi, double t0,
                                    const ManifoldShootConfig& cfg = {});

struct MicroDiffusionReport {
    double v = 0;
    double t_crossing = 0;   // level-v crossing of the scanned M^I process
    double deltaI = 0;
    double eps_v = 0;
    double rel_error = 0;    // |deltaI - eps v| / |eps v|
    double series_max = 0;
    int crossings_tried = 0;
};

// Scans the M^I process on [scan_t0, scan_t0 + scan_T], finds a level-v
// crossing at an admissible anchor, and runs the action-change measurement
// there. Throws if the level is never crossed or no crossing is admissible.
MicroDiffusionReport micro_diffusion_demo(const ModelSpec& m, const NoisePath& path,
                                          double eps, double I, double phi, double v,
                                          double scan_t0, double scan_T,
                                          const SublinearityReport& admissible,
                                          const MelnikovConfig& mcfg = {},
                                          const ManifoldShootConfig& scfg = {});

}  // namespace rotopend

#endif
