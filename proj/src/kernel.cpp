#include "rotopend/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rotopend {

double Kernel::operator()(double h) const {
    const double x = std::fabs(h);
    switch (family) {
        case KernelFamily::PoweredExponential:
            return std::exp(-std::pow(x, a));
        case KernelFamily::Matern32: {
            const double c = std::sqrt(3.0) * x;
            return (1.0 + c) * std::exp(-c);
        }
    }
    return 0.0;
}

double Kernel::support_lag() const {
    switch (family) {
        case KernelFamily::PoweredExponential:
            // exp(-x^a) < 1e-28 once x^a > 64.5
            return std::pow(64.5, 1.0 / a);
        case KernelFamily::Matern32:
            return 40.0;
    }
    return 40.0;
}

Kernel make_kernel(KernelFamily family, double a) {
    Kernel k;
    k.family = family;
    if (family == KernelFamily::PoweredExponential) {
        if (!(a > 1.0 && a <= 2.0))
            throw std::invalid_argument(
                "powered-exponential kernel requires exponent in (1, 2], got " +
                std::to_string(a));
        k.a = a;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "pexp-a%g", a);
        k.id = buf;
    } else {
        k.a = 0.0;
        k.id = "matern32";
    }
    return k;
}

Kernel kernel_from_id(const std::string& id, double a) {
    if (id == "pexp") return make_kernel(KernelFamily::PoweredExponential, a);
    if (id.rfind("pexp-a", 0) == 0)
        return make_kernel(KernelFamily::PoweredExponential, std::stod(id.substr(6)));
    if (id == "matern32") return make_kernel(KernelFamily::Matern32);
    throw std::invalid_argument("unknown kernel id: " + id);
}

}  // namespace rotopend
