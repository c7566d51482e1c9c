#ifndef ROTOPEND_NOISE_DIAGNOSTICS_HPP
#define ROTOPEND_NOISE_DIAGNOSTICS_HPP

#include <utility>
#include <vector>

#include "rotopend/noise_path.hpp"

namespace rotopend {

// Minimal intercept A with |omega(s)| <= A + B|s| over the sampled domain,
// clamped below at zero.
double sublinearity_envelope(const NoisePath& path, double B);

struct SublinearityReport {
    double A = 0;
    double B = 0;
    // Disjoint closed intervals of admissible anchor times within [-T, T],
    // resolved to grid nodes.
    std::vector<std::pair<double, double>> admissible;
    double measure_ratio = 0;  // total admissible length / (2T)

    bool is_admissible(double t) const;
};

// Anchor times t in [-T, T] such that |omega(t+s)| <= A + B|s| for every
// representable s (finite-horizon stand-in for the all-of-R condition).
SublinearityReport admissible_times(const NoisePath& path, double A, double B, double T);

struct BumpSpec {
    double A = 0;
    double rho = 0.5;  // transition width, must be > 0
    double B = 0.1;    // envelope slope entering the admissible-set condition
};

// Time-dependent cutoff: 1 where the envelope condition holds, 0 at
// grid-distance >= rho from that set, C^1 smoothstep (3x^2 - 2x^3) in the
// transition shell. Max slope is 1.5/rho.
class BumpEvaluator {
public:
    BumpEvaluator(const NoisePath& path, const BumpSpec& spec);

    // Value in [0,1]; s must be inside the path domain.
    double operator()(double s) const;

    bool everywhere_one() const { return everywhere_one_; }

private:
    double t_start_, dt_, t_end_;
    double rho_;
    bool everywhere_one_ = false;
    bool everywhere_zero_ = false;  // no grid node satisfies the envelope at all
    std::vector<double> distance_;  // per node, distance to the nearest in-set node
};

double bump_value(const NoisePath& path, const BumpSpec& spec, double s);

struct ErgodicAverages {
    double mean = 0;
    double mean_square = 0;
};

// Trapezoid time averages of omega and omega^2 over [0, T].
ErgodicAverages ergodic_average(const NoisePath& path, double T);

// Empirical lower estimate for the Holder constant at exponent alpha,
// max_{pairs} |d omega| / |d t|^alpha over strides 1, 2, 4.
double holder_constant(const NoisePath& path, double alpha);

}  // namespace rotopend

#endif
