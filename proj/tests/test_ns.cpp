#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dalab/ns_solver.hpp"
#include "dalab/prior.hpp"

using namespace dalab;

namespace {

NSConfig tg_config(int n, double nu, double dt, double t_end) {
    NSConfig cfg;
    cfg.viscosity = nu;
    cfg.grid = Grid2(n);
    cfg.dt = dt;
    cfg.t_end = t_end;
    return cfg;
}

std::vector<double> uniform_times(double t_end, int count) {
    std::vector<double> ts;
    for (int i = 1; i <= count; ++i) ts.push_back(t_end * i / count);
    return ts;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(NsSolver(tg_config(16, -1.0, 1e-3, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(NsSolver(tg_config(16, 0.1, 1e-3, 1.0005e-3 * 7)), ConfigError);
    // dt above the advective ceiling is a configuration error.
    NsSolver coarse(tg_config(32, 0.1, 0.25, 0.5));
    CHECK_THROWS_AS(coarse.solve(taylor_green(Grid2(32)), {0.5}), ConfigError);
}

TEST_CASE("zero field is a fixed point") {
    NsSolver solver(tg_config(16, 0.1, 1e-2, 0.1));
    SpectralField zero(Grid2(16));
    SpectralField stepped = solver.step(zero);
    CHECK(l2_norm(stepped) == 0.0);
    Trajectory traj = solver.solve(zero, uniform_times(0.1, 5));
    for (const auto& s : traj.states) CHECK(l2_norm(s) == 0.0);
}

TEST_CASE("shear mode: nonlinearity cancels, viscous decay is exact") {
    const double nu = 0.05, dt = 1e-2;
    NsSolver solver(tg_config(16, nu, dt, 0.1));
    SpectralField u0 = shear_mode(Grid2(16));
    SpectralField u1 = solver.step(u0);
    // (sin y, 0) has |k|^2 = 1; the integrating factor applies exp(-nu dt)
    // exactly and the nonlinear term vanishes identically.
    SpectralField expected = u0;
    expected *= std::exp(-nu * dt);
    CHECK(l2_distance(u1, expected) <= 1e-13 * l2_norm(u0));
}

TEST_CASE("taylor-green single step matches the closed-form solution") {
    const double nu = 0.1, dt = 1e-3;
    NsSolver solver(tg_config(32, nu, dt, 1.0));
    SpectralField u0 = taylor_green(Grid2(32));
    SpectralField u1 = solver.step(u0);
    SpectralField expected = u0;
    expected *= taylor_green_decay(nu, dt);
    CHECK(l2_distance(u1, expected) <= 1e-10 * l2_norm(u0));
}

TEST_CASE("taylor-green trajectory oracle at T=1") {
    const double nu = 0.1;
    NsSolver solver(tg_config(32, nu, 1e-3, 1.0));
    SpectralField u0 = taylor_green(Grid2(32));
    Trajectory traj = solver.solve(u0, uniform_times(1.0, 8));
    SpectralField expected = u0;
    expected *= taylor_green_decay(nu, 1.0);
    const double rel = l2_distance(traj.states.back(), expected) / l2_norm(u0);
    CHECK(rel <= 1e-6);

    // Energy ratio at T matches exp(-2*2 nu T).
    const double ratio = l2_norm(traj.states.back()) / l2_norm(u0);
    CHECK(ratio == doctest::Approx(taylor_green_decay(nu, 1.0)).epsilon(1e-6));
}

TEST_CASE("determinism: identical inputs give bit-identical trajectories") {
    PriorSpec spec;
    spec.k_max = 4;
    SpectralField u0 = sample_prior_field(spec, Grid2(16), 3, 0);
    NsSolver solver(tg_config(16, 1e-2, 1.0 / 256.0, 0.125));
    Trajectory a = solver.solve(u0, uniform_times(0.125, 4));
    Trajectory b = solver.solve(u0, uniform_times(0.125, 4));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.states[i].raw() == b.states[i].raw());
    }
}

TEST_CASE("semigroup restart is bit-exact") {
    PriorSpec spec;
    spec.k_max = 4;
    SpectralField u0 = sample_prior_field(spec, Grid2(16), 9, 2);
    NsSolver solver(tg_config(16, 1e-2, 1.0 / 256.0, 0.25));
    SpectralField prepared = solver.prepare_initial(u0);

    SpectralField direct = solver.advance(prepared, 64, 0);
    SpectralField half = solver.advance(prepared, 32, 0);
    SpectralField restarted = solver.advance(half, 32, 32);
    CHECK(direct.raw() == restarted.raw());
}

TEST_CASE("divergence-freeness preserved along the solve") {
    PriorSpec spec;
    spec.k_max = 5;
    SpectralField u0 = sample_prior_field(spec, Grid2(16), 5, 1);
    NsSolver solver(tg_config(16, 1e-3, 1.0 / 256.0, 0.25));
    Trajectory traj = solver.solve(u0, uniform_times(0.25, 8));
    for (const auto& s : traj.states) CHECK(s.divergence_residual() <= 1e-10);
}

TEST_CASE("energy verifier") {
    NsSolver solver(tg_config(16, 1e-3, 1.0 / 256.0, 0.25));
    SpectralField zero(Grid2(16));
    Trajectory ztraj = solver.solve(zero, uniform_times(0.25, 4));
    PropertyReport zrep = verify_energy(ztraj);
    CHECK(zrep.pass);
    CHECK(zrep.lhs == 0.0);

    PriorSpec spec;
    spec.k_max = 5;
    for (std::uint64_t member : {0u, 1u, 2u}) {
        SpectralField u0 = sample_prior_field(spec, Grid2(16), 77, member);
        Trajectory traj = solver.solve(u0, uniform_times(0.25, 16));
        CHECK(verify_energy(traj).pass);
    }
}

TEST_CASE("coercivity verifier with the shear-mode closed form") {
    const double nu = 0.05, T = 0.25;
    NsSolver solver(tg_config(16, nu, T / 128.0, T));
    SpectralField u0 = shear_mode(Grid2(16));
    Trajectory traj = solver.solve(u0, uniform_times(T, 128));
    PropertyReport rep = verify_coercivity(traj, nu);
    CHECK(rep.pass);
    // Exact enstrophy integral for pure viscous decay of a |k|=1 mode:
    // ||u0||^2 (1 - e^{-2 nu T}) / (2 nu).
    const double e0 = l2_norm(traj.states.front());
    const double exact = e0 * e0 * (1.0 - std::exp(-2.0 * nu * T)) / (2.0 * nu);
    CHECK(rep.lhs == doctest::Approx(exact).epsilon(1e-4));
    CHECK(rep.rhs == doctest::Approx(e0 * e0 / nu).epsilon(1e-12));

    // Taylor-Green variant: |k|^2 = 2, decay e^{-2 nu t}.
    SpectralField tg = taylor_green(Grid2(16));
    Trajectory tg_traj = solver.solve(tg, uniform_times(T, 128));
    PropertyReport tg_rep = verify_coercivity(tg_traj, nu);
    const double tg_e0 = l2_norm(tg_traj.states.front());
    const double tg_exact = 2.0 * tg_e0 * tg_e0 * (1.0 - std::exp(-4.0 * nu * T)) / (4.0 * nu);
    CHECK(tg_rep.pass);
    CHECK(tg_rep.lhs == doctest::Approx(tg_exact).epsilon(1e-4));

    CHECK(verify_coercivity(solver.solve(SpectralField(Grid2(16)), uniform_times(T, 64)), nu)
              .pass);
}

TEST_CASE("time-regularity verifier") {
    const double nu = 0.05, T = 0.25;
    NsSolver solver(tg_config(16, nu, T / 64.0, T));

    // Shear decay: ||u(t)-u(s)||_{H^{-L}} <= nu ||u0||_{H^{-L}} |t-s| since
    // |d/dt e^{-nu t}| <= nu; the reported quotient should sit within 5%.
    SpectralField u0 = shear_mode(Grid2(16));
    Trajectory traj = solver.solve(u0, uniform_times(T, 16));
    PropertyReport rep = verify_time_regularity(traj, 2.0);
    CHECK(rep.pass);
    const double bound = nu * sobolev_norm(u0, -2.0);
    CHECK(rep.lhs <= bound * 1.0001);
    CHECK(rep.lhs >= bound * 0.95);
}

TEST_CASE("energy identity residual is at time-discretization order") {
    // On Taylor-Green the semidiscrete energy identity is exact; RK4 leaves
    // only O(dt^4) drift plus trapezoid error. The residual must stay tiny.
    const double nu = 0.1, T = 0.5, dt = 0.5 / 512.0;
    NsSolver solver(tg_config(16, nu, dt, T));
    SpectralField u0 = taylor_green(Grid2(16));
    Trajectory traj = solver.solve(u0, uniform_times(T, 64));
    double residual = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double h = traj.times[i + 1] - traj.times[i];
        const double e0 = l2_norm(traj.states[i]);
        const double e1 = l2_norm(traj.states[i + 1]);
        const double g0 = grad_norm(traj.states[i]);
        const double g1 = grad_norm(traj.states[i + 1]);
        residual += std::abs(0.5 * (e1 * e1 - e0 * e0) +
                             nu * 0.5 * (g0 * g0 + g1 * g1) * h);
    }
    CHECK(residual <= 1e-4 * l2_norm(u0) * l2_norm(u0));
}

TEST_CASE("refinement convergence on a smooth random field") {
    PriorSpec spec;
    spec.k_max = 6;
    spec.support_radius = 1.0;
    const double nu = 5e-3, T = 0.125, dt = 1.0 / 512.0;

    std::vector<int> ns = {16, 32, 64, 128};
    std::vector<SpectralField> finals;
    for (int n : ns) {
        SpectralField u0 = sample_prior_field(spec, Grid2(n), 123, 0);
        NsSolver solver(tg_config(n, nu, dt, T));
        finals.push_back(solver.solve(u0, {T}).states.back());
    }
    std::vector<double> errs;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i)
        errs.push_back(l2_distance_band(finals[i], finals[i + 1]));
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) CHECK(errs[i + 1] < errs[i]);
}

TEST_CASE("blow-up or CFL violation is reported, not hidden") {
    NSConfig cfg = tg_config(16, 1e-8, 0.45, 9.0);
    NsSolver solver(cfg);
    PriorSpec spec;
    spec.k_max = 6;
    spec.sigma = 3.0;
    spec.support_radius = 40.0;
    SpectralField u0 = sample_prior_field(spec, Grid2(16), 5150, 0);
    u0 *= 10.0;
    bool reported = false;
    try {
        solver.solve(u0, {9.0});
    } catch (const ConfigError&) {
        reported = true;  // CFL guard caught it at entry
    } catch (const BlowUpError& e) {
        reported = true;
        CHECK(e.step_index >= 1);
    }
    CHECK(reported);
}
