#ifndef ROTOPEND_RNG_HPP
#define ROTOPEND_RNG_HPP

#include <cmath>
#include <cstdint>

namespace rotopend {

// SplitMix64. Chosen over std::mt19937_64 + std::normal_distribution because
// the standard distributions are implementation-defined: the same seed must
// reproduce bit-identical paths on any toolchain.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1].
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }
};

// Child seed for task `index` under `master`; recorded in run manifests so
// any worker partition reproduces the same streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 s(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return s.next();
}

// Standard normal draws via Box-Muller, two at a time.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.next_unit();
        const double u2 = rng_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rotopend

#endif
