#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rotopend/noise_diagnostics.hpp"
#include "rotopend/rng.hpp"

using namespace rotopend;

namespace {
NoisePath constant_path(double c, double t0 = -50.0, double dt = 0.01,
                        std::size_t n = 10001) {
    return NoisePath::from_function([c](double) { return c; }, t0, dt, n);
}
}  // namespace

TEST_CASE("sublinearity envelope on synthetic paths") {
    CHECK(sublinearity_envelope(constant_path(0.0), 0.1) == 0.0);
    CHECK(sublinearity_envelope(constant_path(2.5), 0.0) == doctest::Approx(2.5));
    CHECK(sublinearity_envelope(constant_path(-2.5), 0.3) == doctest::Approx(2.5));

    // omega(s) = sin(s) on [-50, 50], B = 0.1: exhaustive grid maximum oracle
    const NoisePath sine =
        NoisePath::from_function([](double s) { return std::sin(s); }, -50.0, 0.01, 10001);
    double oracle = 0.0;
    for (std::size_t i = 0; i < sine.size(); ++i) {
        const double s = sine.node_time(i);
        oracle = std::max(oracle, std::fabs(std::sin(s)) - 0.1 * std::fabs(s));
    }
    CHECK(sublinearity_envelope(sine, 0.1) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("envelope is monotone in the slope") {
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const NoisePath p = NoisePath::sample(k, -30.0, 0.01, 6001, 11);
    double prev = sublinearity_envelope(p, 0.0);
    for (double B : {0.05, 0.1, 0.2, 0.5}) {
        const double A = sublinearity_envelope(p, B);
        CHECK(A <= prev + 1e-14);
        prev = A;
    }
}

TEST_CASE("admissible_times on trivial paths") {
    const NoisePath zero = constant_path(0.0);
    const SublinearityReport r = admissible_times(zero, 0.5, 0.1, 40.0);
    REQUIRE(r.admissible.size() == 1);
    CHECK(r.admissible[0].first == doctest::Approx(-40.0));
    CHECK(r.admissible[0].second == doctest::Approx(40.0));
    CHECK(r.measure_ratio == doctest::Approx(1.0));

    // A at least the sup with B = 0 admits everything
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const NoisePath p = NoisePath::sample(k, -30.0, 0.01, 6001, 3);
    double sup = 0;
    for (double v : p.values()) sup = std::max(sup, std::fabs(v));
    const SublinearityReport r2 = admissible_times(p, sup, 0.0, 25.0);
    CHECK(r2.measure_ratio == doctest::Approx(1.0));
}

TEST_CASE("admissible_times is monotone in T") {
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const NoisePath p = NoisePath::sample(k, -60.0, 0.01, 12001, 17);
    const double A = sublinearity_envelope(p, 0.1) * 0.8;
    const SublinearityReport small = admissible_times(p, A, 0.1, 20.0);
    const SublinearityReport large = admissible_times(p, A, 0.1, 50.0);
    // every admissible t for T=20 stays admissible for T=50
    for (const auto& [lo, hi] : small.admissible) {
        CHECK(large.is_admissible(lo));
        CHECK(large.is_admissible(hi));
        CHECK(large.is_admissible(0.5 * (lo + hi)));
    }
}

TEST_CASE("admissible window must fit the domain") {
    const NoisePath zero = constant_path(0.0, -10.0, 0.01, 2001);
    CHECK_THROWS(admissible_times(zero, 1.0, 0.1, 20.0));
}

TEST_CASE("bump function plateau, support, and transition") {
    // |omega| <= A + B|s| fails only on a localized spike around s = 20
    const double A = 1.0, B = 0.0, rho = 0.5;
    const NoisePath p = NoisePath::from_function(
        [](double s) { return 3.0 * std::exp(-(s - 20.0) * (s - 20.0) / 4.0); }, -50.0,
        0.01, 10001);
    const BumpSpec spec{A, rho, B};

    CHECK(bump_value(p, spec, 0.0) == 1.0);    // deep inside the admissible set
    CHECK(bump_value(p, spec, 20.0) == 0.0);   // on the spike, far from the set
    // transition midpoint: half the smoothstep
    const BumpEvaluator psi(p, spec);
    // find a node just outside the set and test the shell value d = rho/2
    double s_edge = 0;
    for (double s = 15.0; s < 20.0; s += 0.01)
        if (std::fabs(p.evaluate(s)) > A) {
            s_edge = s;
            break;
        }
    const double mid = psi(s_edge - 0.01 + rho / 2.0);  // d = rho/2 from the last inside node
    CHECK(mid == doctest::Approx(0.5).epsilon(0.05));
    for (double s = -40.0; s <= 40.0; s += 0.37) {
        const double v = psi(s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS(psi(-60.0));
}

TEST_CASE("bump slope stays within 1.5/rho") {
    const double rho = 0.4;
    const NoisePath p = NoisePath::from_function(
        [](double s) { return 3.0 * std::exp(-s * s); }, -30.0, 0.01, 6001);
    const BumpSpec spec{1.0, rho, 0.0};
    const BumpEvaluator psi(p, spec);
    double max_slope = 0;
    const double h = 1e-4;
    for (double s = -5.0; s <= 5.0; s += 5e-4)
        max_slope = std::max(max_slope, std::fabs(psi(s + h) - psi(s - h)) / (2 * h));
    CHECK(max_slope <= 1.5 / rho + 1e-6);
}

TEST_CASE("bump equals one everywhere when the anchor is admissible") {
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const NoisePath p = NoisePath::sample(k, -40.0, 0.01, 8001, 23);
    const double B = 0.1;
    const double A = sublinearity_envelope(p, B) + 0.05;
    const SublinearityReport rep = admissible_times(p, A, B, 30.0);
    REQUIRE(!rep.admissible.empty());
    const double t0 = 0.5 * (rep.admissible[0].first + rep.admissible[0].second);
    const BumpEvaluator psi(p.shifted(t0), BumpSpec{A, 0.5, B});
    CHECK(psi.everywhere_one());
    for (double s : {-20.0, -3.3, 0.0, 7.7, 25.0}) CHECK(psi(s) == 1.0);
}

TEST_CASE("ergodic averages on synthetic and sampled paths") {
    const NoisePath c = constant_path(1.7, -1.0, 0.01, 2001);
    const ErgodicAverages ea = ergodic_average(c, 15.0);
    CHECK(ea.mean == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(ea.mean_square == doctest::Approx(1.7 * 1.7).epsilon(1e-12));
    CHECK_THROWS(ergodic_average(c, 50.0));

    // time average of a long path: bounded by 3x the analytic std of the mean,
    // sigma^2 = (2/T) int_0^T r(s) ds for T >> correlation length
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const double T = 1000.0;
    const double var_mean = std::sqrt(std::numbers::pi) / T;
    int ok = 0;
    const int n_paths = 30;
    for (int i = 0; i < n_paths; ++i) {
        const NoisePath p = NoisePath::sample(k, -1.0, 0.01, 100201, derive_seed(31, i));
        const ErgodicAverages e = ergodic_average(p, T);
        if (std::fabs(e.mean) <= 3.0 * std::sqrt(var_mean)) ++ok;
        CHECK(std::fabs(e.mean_square - 1.0) < 0.25);
    }
    CHECK(ok >= n_paths - 2);  // 3-sigma misses are rare
}

TEST_CASE("holder constant estimates") {
    CHECK(holder_constant(constant_path(0.0), 0.5) == 0.0);

    // linear path: ratio |ds|/|ds|^alpha = dt^{1-alpha} at stride 1
    const double dt = 0.01, alpha = 0.9;
    const NoisePath lin =
        NoisePath::from_function([](double s) { return s; }, 0.0, dt, 1001);
    const double expected = std::pow(4 * dt, 1.0 - alpha);  // largest stride dominates
    CHECK(holder_constant(lin, alpha) == doctest::Approx(expected).epsilon(1e-10));

    // stability of the estimate under grid refinement for smooth kernels
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const NoisePath coarse = NoisePath::sample(k, 0.0, 0.02, 2001, 8);
    const NoisePath fine = NoisePath::sample(k, 0.0, 0.01, 4001, 8);
    const double ch_c = holder_constant(coarse, 0.49);
    const double ch_f = holder_constant(fine, 0.49);
    CHECK(ch_c > 0);
    CHECK(ch_f > 0);
    CHECK(std::isfinite(ch_c));
    CHECK(std::isfinite(ch_f));
    CHECK_THROWS(holder_constant(fine, 1.0));
}
