#ifndef ROTOPEND_KERNEL_HPP
#define ROTOPEND_KERNEL_HPP

#include <string>

namespace rotopend {

enum class KernelFamily { PoweredExponential, Matern32 };

// Autocorrelation kernel of the driving stationary Gaussian process.
// Both families are normalized (r(0)=1), even, |r|<=1, and absolutely
// integrable; the powered-exponential exponent is restricted to (1,2] so
// sample paths stay Holder continuous.
struct Kernel {
    KernelFamily family = KernelFamily::PoweredExponential;
    double a = 2.0;  // exponent, powered-exponential only
    std::string id;

    double operator()(double h) const;

    // Lag beyond which |r| < ~1.7e-28 for the defaults; used to size
    // quadrature windows and embedding padding.
    double support_lag() const;
};

// Throws std::invalid_argument if the exponent is outside (1,2].
Kernel make_kernel(KernelFamily family, double a = 2.0);

// Registry lookup by string id: "pexp" (uses `a`) or "matern32".
Kernel kernel_from_id(const std::string& id, double a = 2.0);

}  // namespace rotopend

#endif
