#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rotopend/experiments.hpp"
#include "rotopend/gronwall.hpp"
#include "rotopend/integrate.hpp"
#include "rotopend/rng.hpp"

using namespace rotopend;

namespace {
NoisePath seeded_path(std::uint64_t seed, double t0 = -20.0, double span = 60.0) {
    const Kernel k = make_kernel(KernelFamily::PoweredExponential, 2.0);
    const auto n = static_cast<std::size_t>(span / 0.01) + 1;
    return NoisePath::sample(k, t0, 0.01, n, seed);
}
}  // namespace

TEST_CASE("energy conservation along the unperturbed flow") {
    const ModelSpec m = default_model();
    const State z0(1.0, 0.0, 0.05, 0.02);
    const Trajectory traj = integrate_unperturbed(m, z0, 0.0, 100.0);
    const double e0 = hamiltonian0(m, z0);
    double drift = 0;
    for (const State& z : traj.states)
        drift = std::max(drift, std::fabs(hamiltonian0(m, z) - e0));
    CHECK(drift < 1e-9);
    CHECK(traj.back_time() == doctest::Approx(100.0));
}

TEST_CASE("integrated separatrix tracks the closed form") {
    const SeparatrixFidelity f = separatrix_fidelity(default_model(), -10.0, 3.0, 1e-3);
    CHECK(f.sup_error < 1e-8);
}

TEST_CASE("elapsed-time relation through the shifted path") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(42);
    const State z0(0.8, 0.1, 0.2, 0.3);
    const double eps = 5e-3;
    const Trajectory direct = integrate(m, path, eps, z0, 5.0, 7.0);
    const Trajectory shifted = integrate(m, path.shifted(5.0), eps, z0, 0.0, 2.0);
    REQUIRE(direct.states.size() == shifted.states.size());
    double worst = 0;
    for (std::size_t k = 0; k < direct.states.size(); ++k)
        worst = std::max(worst, state_distance(direct.states[k], shifted.states[k]));
    CHECK(worst < 1e-12);
}

TEST_CASE("cocycle property of the flow map") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(7);
    const State z0(0.5, 0.7, 0.1, 0.6);
    const double eps = 3e-3;
    const Trajectory leg1 = integrate(m, path, eps, z0, 1.0, 4.0);
    const Trajectory leg2 = integrate(m, path, eps, leg1.back_state(), 4.0, 9.0);
    const Trajectory whole = integrate(m, path, eps, z0, 1.0, 9.0);
    CHECK(state_distance(leg2.back_state(), whole.back_state()) < 1e-12);
}

TEST_CASE("backward then forward returns to the start") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(3);
    const State z0(0.4, 0.2, 0.15, 0.45);
    const double eps = 1e-2;
    const Trajectory back = integrate(m, path, eps, z0, 2.0, 1.0);
    const Trajectory forth = integrate(m, path, eps, back.back_state(), 1.0, 2.0);
    CHECK(state_distance(forth.back_state(), z0) < 1e-10);
}

TEST_CASE("window and step validation") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(1, -1.0, 2.0);
    const State z0(0.1, 0.0, 0.0, 0.3);
    CHECK_THROWS_AS(integrate(m, path, 1e-3, z0, 0.0, 5.0), std::out_of_range);
    IntegratorConfig cfg;
    cfg.h = 0.02;  // exceeds dt
    CHECK_THROWS_AS(integrate(m, path, 1e-3, z0, 0.0, 0.5, cfg), std::invalid_argument);
    // eps = 0 ignores the path domain entirely
    CHECK_NOTHROW(integrate(m, path, 0.0, z0, 0.0, 5.0));
}

TEST_CASE("variational flow basics") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(9);
    const State z0(1.0, 0.1, 0.12, 0.4);
    const Trajectory traj = integrate_variational(m, path, 2e-3, z0, 0.0, 10.0);
    REQUIRE(traj.jacobians.size() == traj.states.size());
    const Mat4 first = traj.jacobians.front();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) CHECK(first(r, c) == (r == c ? 1.0 : 0.0));
    // symplectic volume: det = 1 throughout, even with the noise factor
    for (std::size_t k = 0; k < traj.jacobians.size(); k += 500)
        CHECK(traj.jacobians[k].det() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(traj.jacobians.back().det() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("variational flow reproduces the saddle rates") {
    const ModelSpec m = default_model();
    const Trajectory traj = integrate_unperturbed(m, State(1.0, 0.0, 0.0, 0.0), 0.0, 3.0,
                                                  {1e-3, true});
    const Mat4& J = traj.jacobians.back();
    // pendulum block (p, q) eigenvalues: cosh(3) +- sqrt(cosh^2 - 1) = e^{+-3}
    const double a = J(2, 2), b = J(2, 3), c = J(3, 2), d = J(3, 3);
    const double tr = a + d, det = a * d - b * c;
    const double lam1 = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
    const double lam2 = 0.5 * (tr - std::sqrt(tr * tr - 4 * det));
    CHECK(lam1 == doctest::Approx(std::exp(3.0)).epsilon(0.01));
    CHECK(lam2 == doctest::Approx(std::exp(-3.0)).epsilon(0.01));
}

TEST_CASE("variational flow matches divided differences") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(21);
    const State z0(0.9, 0.4, 0.18, 0.35);
    const double eps = 4e-3, t0 = -1.0, t1 = 2.5;
    const Trajectory traj = integrate_variational(m, path, eps, z0, t0, t1);
    const Mat4& J = traj.jacobians.back();
    const double h = 1e-6;
    const double base[4] = {z0.I, z0.phi, z0.p, z0.q};
    for (int col = 0; col < 4; ++col) {
        double plus[4] = {base[0], base[1], base[2], base[3]};
        double minus[4] = {base[0], base[1], base[2], base[3]};
        plus[col] += h;
        minus[col] -= h;
        const State zp = integrate(m, path, eps, State(plus[0], plus[1], plus[2], plus[3]),
                                   t0, t1)
                             .back_state();
        const State zm = integrate(m, path, eps,
                                   State(minus[0], minus[1], minus[2], minus[3]), t0, t1)
                             .back_state();
        const double cols[4] = {(zp.I - zm.I) / (2 * h), (zp.phi - zm.phi) / (2 * h),
                                (zp.p - zm.p) / (2 * h), (zp.q - zm.q) / (2 * h)};
        for (int row = 0; row < 4; ++row)
            CHECK(J(row, col) == doctest::Approx(cols[row]).epsilon(2e-4).scale(1.0));
    }
}

TEST_CASE("modified system with a saturated bump matches the original") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(17);
    const State z0(0.6, 0.2, 0.1, 0.5);
    const double eps = 5e-3;
    const BumpSpec huge{1e6, 0.5, 0.1};  // psi == 1 on the whole domain
    const Trajectory a = integrate_modified(m, path, eps, huge, z0, 0.0, 5.0);
    const Trajectory b = integrate(m, path, eps, z0, 0.0, 5.0);
    double worst = 0;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        worst = std::max(worst, state_distance(a.states[k], b.states[k]));
    CHECK(worst < 1e-12);
}

TEST_CASE("modified system with a vanished bump matches the unperturbed flow") {
    const ModelSpec m = default_model();
    // noise far above the envelope on the whole window: psi == 0
    const NoisePath loud = NoisePath::from_function(
        [](double) { return 50.0; }, -10.0, 0.01, 4001);
    const State z0(0.6, 0.2, 0.1, 0.5);
    const BumpSpec tiny{1.0, 0.3, 0.0};
    const Trajectory a = integrate_modified(default_model(), loud, 0.05, tiny, z0, 0.0, 5.0);
    const Trajectory b = integrate_unperturbed(m, z0, 0.0, 5.0);
    double worst = 0;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        worst = std::max(worst, state_distance(a.states[k], b.states[k]));
    CHECK(worst < 1e-12);
}

TEST_CASE("modified system agrees with the original at admissible anchors") {
    const ModifiedConsistency mc = modified_consistency_check(
        default_model(), make_kernel(KernelFamily::PoweredExponential, 2.0), 1e-3, 3, 2, 91);
    CHECK(mc.n_windows >= 4);
    CHECK(mc.max_sup_diff < 1e-12);
}

TEST_CASE("flow distance scales linearly in eps") {
    const ModelSpec m = default_model();
    const NoisePath path = seeded_path(42);
    const State z0(0.5, 0.2, 0.12, 0.4);
    const BumpSpec bump{1e6, 0.5, 0.1};
    std::vector<double> epss{1e-2, 1e-3, 1e-4};
    std::vector<double> c1s;
    for (double eps : epss) {
        const FlowDistance d = flow_distance(m, path, eps, bump, z0, 2.0);
        c1s.push_back(d.c1);
    }
    const SlopeFit fit = fit_loglog(epss, c1s);
    CHECK(fit.slope >= 0.8);

    const FlowDistance d0 = flow_distance(m, path, 0.0, bump, z0, 2.0);
    CHECK(d0.c0 < 1e-12);
    CHECK(d0.c1 < 1e-12);
}

TEST_CASE("gronwall closed forms") {
    CHECK(gronwall_bound_I(1, 0, 0, 0, 5.0) == doctest::Approx(1.0));
    CHECK(gronwall_bound_I(0, 1, 0, 1, 2.0) == doctest::Approx(2.0 * std::exp(2.0)));
    CHECK_THROWS_AS(gronwall_bound_I(-1, 0, 0, 0, 1.0), std::invalid_argument);

    // II with d4 = 0 reduces to I
    for (double t : {0.0, 0.7, 2.0})
        CHECK(gronwall_bound_II(0.3, 0.2, 0.1, 0.5, 0.0, t) ==
              doctest::Approx(gronwall_bound_I(0.3, 0.2, 0.1, 0.5, t)).epsilon(1e-15));
    CHECK(gronwall_bound_II(1, 1, 1, 1, 1, 1.0) ==
          doctest::Approx(3.0 * std::exp(1.5)).epsilon(1e-15));

    // III evaluates the explicit bound inside the validity window
    const double v = gronwall_bound_III(1.0, 2.0, 3.0, 0.5, 1e-3, 0.5, 0.9, 1.0);
    CHECK(v == doctest::Approx(1e-3 * (1.0 + 2.0 + 1.5) * std::exp(0.5)).epsilon(1e-12));
    CHECK_THROWS(gronwall_bound_III(1, 1, 1, 0.5, 1e-3, 0.5, 2.0, 1.0));   // k too large
    CHECK_THROWS(gronwall_bound_III(1, 1, 1, 0.5, 1e-3, 0.5, 0.9, 50.0));  // t outside window
}

TEST_CASE("measured flow distances sit under the gronwall bounds") {
    const GronwallBattery b = gronwall_battery(
        default_model(), make_kernel(KernelFamily::PoweredExponential, 2.0), 1e-3, 20, 5);
    CHECK(b.n_failures == 0);
    CHECK(b.worst_state_margin <= 1.0);
    CHECK(b.worst_jac_margin <= 1.0);
}

TEST_CASE("non-finite states are reported") {
    const ModelSpec m = default_model();
    ModelSpec bad = m;
    bad.dV = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(integrate_unperturbed(bad, State(0, 0, 0.1, 0.3), 0.0, 1.0),
                    std::runtime_error);
}

TEST_CASE("trajectory csv layout") {
    const ModelSpec m = default_model();
    const Trajectory traj =
        integrate_unperturbed(m, State(1, 0, 0.1, 0.2), 0.0, 0.01, {1e-3, true});
    const auto file = std::filesystem::temp_directory_path() / "rotopend_traj_test.csv";
    traj.write_csv(file.string(), 2);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("t,I,phi,p,q,j11", 0) == 0);
    std::filesystem::remove(file);
}
