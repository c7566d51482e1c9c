#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rotopend/model.hpp"
#include "rotopend/rng.hpp"

using namespace rotopend;

namespace {
constexpr double kPi = std::numbers::pi;

// central finite differences of a scalar function of the state
template <class F>
Vec4 fd_gradient(F&& f, const State& z, double h = 1e-5) {
    Vec4 g;
    const double base[4] = {z.I, z.phi, z.p, z.q};
    for (int i = 0; i < 4; ++i) {
        double plus[4] = {base[0], base[1], base[2], base[3]};
        double minus[4] = {base[0], base[1], base[2], base[3]};
        plus[i] += h;
        minus[i] -= h;
        g[i] = (f(State(plus[0], plus[1], plus[2], plus[3])) -
                f(State(minus[0], minus[1], minus[2], minus[3]))) /
               (2 * h);
    }
    return g;
}
}  // namespace

TEST_CASE("default model normalizations") {
    const ModelSpec m = default_model();
    CHECK(m.dV(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.V(0.0) == doctest::Approx(0.0));
    CHECK(m.d2V(0.0) == doctest::Approx(-1.0));
    CHECK(m.beta == doctest::Approx(std::sqrt(-m.d2V(0.0))));
    CHECK(m.V(0.3 + 1.0) == doctest::Approx(m.V(0.3)).epsilon(1e-14));
    CHECK(m.nu(1.0) == doctest::Approx(1.0));
    // H1 gradient vanishes on the cylinder
    const Vec4 g = m.gradH1(State(0.7, 0.33, 0.0, 0.0));
    for (int i = 0; i < 4; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("condition (H1) on a 32x32 grid") {
    const H1ConditionReport rep = check_H1_condition(default_model());
    CHECK(rep.holds);
    CHECK(rep.max_abs_H1 < 1e-12);
    CHECK(rep.max_grad_norm < 1e-12);
}

TEST_CASE("analytic derivatives match finite differences on random states") {
    const ModelSpec m = default_model();
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const State z(-1.5 + 3 * rng.next_unit(), rng.next_unit(),
                      -1 + 2 * rng.next_unit(), rng.next_unit());
        const Vec4 g = m.gradH1(z);
        const Vec4 g_fd = fd_gradient([&](const State& s) { return m.H1(s); }, z);
        for (int i = 0; i < 4; ++i)
            CHECK(g[i] == doctest::Approx(g_fd[i]).epsilon(1e-6).scale(1.0));
        // V', V'', h0' against finite differences
        const double h = 1e-5;
        CHECK(m.dV(z.q) ==
              doctest::Approx((m.V(z.q + h) - m.V(z.q - h)) / (2 * h)).epsilon(1e-6));
        CHECK(m.d2V(z.q) ==
              doctest::Approx((m.V(z.q + h) - 2 * m.V(z.q) + m.V(z.q - h)) / (h * h))
                  .epsilon(1e-4));
        CHECK(m.nu(z.I) ==
              doctest::Approx((m.h0(z.I + h) - m.h0(z.I - h)) / (2 * h)).epsilon(1e-6));
        // Hessian row consistency against gradient differences
        const Mat4 hess = m.hessH1(z);
        const Vec4 gp = m.gradH1(State(z.I, z.phi + h, z.p, z.q));
        const Vec4 gm = m.gradH1(State(z.I, z.phi - h, z.p, z.q));
        for (int i = 0; i < 4; ++i)
            CHECK(hess(i, 1) ==
                  doctest::Approx((gp[i] - gm[i]) / (2 * h)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("unperturbed field") {
    const ModelSpec m = default_model();
    const Vec4 f = unperturbed_field(m, State(1.0, 0.0, 0.0, 0.0));
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(1.0));
    CHECK(f[2] == doctest::Approx(0.0));
    CHECK(f[3] == 0.0);

    // conservation: directional derivative of H0 along the field vanishes
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const State z(-1 + 2 * rng.next_unit(), rng.next_unit(), -1 + 2 * rng.next_unit(),
                      rng.next_unit());
        const Vec4 f2 = unperturbed_field(m, z);
        const Vec4 gH = fd_gradient([&](const State& s) { return hamiltonian0(m, s); }, z);
        double dot = 0;
        for (int j = 0; j < 4; ++j) dot += f2[j] * gH[j];
        CHECK(dot == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    }

    // on the separatrix at tau = 0: qdot = p0(0) = 1/pi
    const SeparatrixPoint s = separatrix(m, 0.0);
    const Vec4 fs = unperturbed_field(m, State(1.0, 0.0, s.p0, s.q0));
    CHECK(fs[3] == doctest::Approx(1.0 / kPi).epsilon(1e-12));
}

TEST_CASE("perturbed field") {
    const ModelSpec m = default_model();
    const NoisePath ones =
        NoisePath::from_function([](double) { return 1.0; }, -10.0, 0.01, 2001);

    // eps = 0 reduces to the unperturbed field
    const State z(1.0, 0.25, 0.2, 0.3);
    const Vec4 f0 = unperturbed_field(m, z);
    const Vec4 fe = perturbed_field(m, z, 0.0, 0.0, ones);
    for (int i = 0; i < 4; ++i) CHECK(fe[i] == f0[i]);

    // the cylinder p = q = 0 is not affected at any eps
    const State zc(0.8, 0.6, 0.0, 0.0);
    const Vec4 fc = perturbed_field(m, zc, 1.0, 0.05, ones);
    const Vec4 fc0 = unperturbed_field(m, zc);
    for (int i = 0; i < 4; ++i) CHECK(fc[i] == doctest::Approx(fc0[i]).epsilon(1e-15));

    // matches J times the finite-difference gradient of H0 + eps H1
    const double eps = 0.01;
    const Vec4 f = perturbed_field(m, z, 0.0, eps, ones);
    const Vec4 g =
        fd_gradient([&](const State& s) { return hamiltonian0(m, s) + eps * m.H1(s); }, z);
    const Vec4 expect{{-g[1], g[0], -g[3], g[2]}};
    for (int i = 0; i < 4; ++i)
        CHECK(f[i] == doctest::Approx(expect[i]).epsilon(1e-6).scale(1.0));

    CHECK_THROWS_AS(perturbed_field(m, z, 100.0, eps, ones), std::out_of_range);
}

TEST_CASE("separatrix closed form") {
    const ModelSpec m = default_model();
    const SeparatrixPoint s0 = separatrix(m, 0.0);
    CHECK(s0.p0 == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(s0.q0 == doctest::Approx(0.5).epsilon(1e-14));

    const SeparatrixPoint far = separatrix(m, -20.0);
    CHECK(std::fabs(far.p0) < 1e-8);
    CHECK(std::fabs(far.q0) < 1e-8);

    // zero pendulum energy along the orbit
    for (double tau : {-6.0, -1.3, 0.0, 0.9, 4.2})
        CHECK(std::fabs(pendulum_energy(m, separatrix(m, tau).p0, separatrix(m, tau).q0)) <
              1e-12);

    // ODE residual via central differences
    const double h = 1e-5;
    for (double tau : {-2.0, 0.0, 2.0}) {
        const SeparatrixPoint a = separatrix(m, tau - h);
        const SeparatrixPoint b = separatrix(m, tau + h);
        const SeparatrixPoint c = separatrix(m, tau);
        const double dq = (b.q0 - a.q0) / (2 * h);
        const double dp = (b.p0 - a.p0) / (2 * h);
        CHECK(std::fabs(dq - c.p0) < 1e-8);
        CHECK(std::fabs(dp + m.dV(c.q0)) < 1e-8);
    }

    // symmetry: p0 even, q0(-tau) = 1 - q0(tau)
    for (double tau : {0.3, 1.7, 5.0}) {
        const SeparatrixPoint plus = separatrix(m, tau);
        const SeparatrixPoint minus = separatrix(m, -tau);
        CHECK(plus.p0 == doctest::Approx(minus.p0).epsilon(1e-12));
        CHECK(minus.q0 == doctest::Approx(1.0 - plus.q0).epsilon(1e-12));
    }
}

TEST_CASE("pendulum energy") {
    const ModelSpec m = default_model();
    CHECK(pendulum_energy(m, 0.0, 0.0) == 0.0);
    CHECK(pendulum_energy(m, 1.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("poisson brackets") {
    const ModelSpec m = default_model();
    CHECK(poisson_P_H1(m, State(1.0, 0.3, 0.0, 0.0)) == 0.0);
    CHECK(poisson_P_H1(m, State(1.0, 0.0, 1.0 / kPi, 0.5)) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(poisson_P_H1(m, State(1.0, 0.0, 1.0 / kPi, 0.25)) ==
          doctest::Approx(-1.0 / (kPi * kPi)).epsilon(1e-12));

    CHECK(poisson_I_H1(m, State(1.0, 0.3, 0.0, 0.2)) == 0.0);
    CHECK(poisson_I_H1(m, State(1.0, 0.25, 1.0 / kPi, 0.1)) ==
          doctest::Approx(2.0 / kPi).epsilon(1e-12));
    CHECK(poisson_I_H1(m, State(1.0, 0.0, 0.6, 0.1)) == doctest::Approx(0.0));

    // default-model closed form of {P, H1}
    SplitMix64 rng(12);
    for (int i = 0; i < 30; ++i) {
        const State z(1.0, rng.next_unit(), -0.5 + rng.next_unit(), rng.next_unit());
        const double expect = -(z.p / kPi) * std::sin(2 * kPi * z.q) *
                              std::cos(2 * kPi * z.phi);
        CHECK(poisson_P_H1(m, z) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("pendulum chart (P, tau)") {
    const ModelSpec m = default_model();

    // the reference point itself
    {
        const auto [P, tau] = pendulum_coords(m, 1.0 / kPi, 0.5);
        CHECK(P == doctest::Approx(0.0).epsilon(1e-14).scale(1.0));
        CHECK(std::fabs(tau) < 1e-9);
    }

    // on-separatrix points map to (0, t)
    for (double t : {-3.0, -1.2, 0.4, 1.9, 3.0}) {
        const SeparatrixPoint s = separatrix(m, t);
        const auto [P, tau] = pendulum_coords(m, s.p0, s.q0);
        CHECK(P == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
        CHECK(tau == doctest::Approx(t).epsilon(1e-6));
    }

    // P output is exactly the pendulum energy
    const double p = 0.31, q = 0.44;
    const auto [P, tau] = pendulum_coords(m, p, q);
    CHECK(P == pendulum_energy(m, p, q));
    (void)tau;

    // outside the neighborhood
    CHECK_THROWS_AS(pendulum_coords(m, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(pendulum_coords(m, 0.05, 0.995), std::domain_error);
}

TEST_CASE("chart round trip under the pendulum flow") {
    // flowing from the tau-preimage for time d increases tau by d
    const ModelSpec m = default_model();
    const SeparatrixPoint s = separatrix(m, -1.0);
    // slightly off the separatrix, inside the chart neighborhood
    const double p1 = s.p0 * 1.01, q1 = s.q0;
    const auto [P1, tau1] = pendulum_coords(m, p1, q1);
    (void)P1;
    // advance the pendulum by hand with the same tiny-step RK4 the chart uses
    State z(0.0, 0.0, p1, q1);
    const double dt = 1e-3, delta = 1.5;
    const auto steps = static_cast<int>(delta / dt);
    for (int i = 0; i < steps; ++i) {
        auto f = [&](double pp, double qq) {
            return std::pair<double, double>{-m.dV(qq), pp};
        };
        const auto [k1p, k1q] = f(z.p, z.q);
        const auto [k2p, k2q] = f(z.p + 0.5 * dt * k1p, z.q + 0.5 * dt * k1q);
        const auto [k3p, k3q] = f(z.p + 0.5 * dt * k2p, z.q + 0.5 * dt * k2q);
        const auto [k4p, k4q] = f(z.p + dt * k3p, z.q + dt * k3q);
        z.p += dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        z.q += dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    }
    const auto [P2, tau2] = pendulum_coords(m, z.p, z.q);
    CHECK(P2 == doctest::Approx(pendulum_energy(m, p1, q1)).epsilon(1e-9));
    CHECK(tau2 - tau1 == doctest::Approx(delta).epsilon(1e-6));
}

TEST_CASE("state wrapping") {
    const State z(0.0, 1.25, 0.0, -0.25);
    CHECK(z.phi == doctest::Approx(0.25));
    CHECK(z.q == doctest::Approx(0.75));
    CHECK(wrap_unit(-1e-18) < 1.0);
    CHECK(state_distance(State(0, 0.99, 0, 0), State(0, 0.01, 0, 0)) ==
          doctest::Approx(0.02).epsilon(1e-12));
}
