#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dalab/measurement.hpp"
#include "dalab/model.hpp"
#include "dalab/prior.hpp"

using namespace dalab;

namespace {

Trajectory constant_trajectory(Grid2 g, double c, const std::vector<double>& times) {
    SpectralField u(g);
    u.at(0, 0, 0) = complexd(c, 0.0);
    Trajectory traj;
    traj.times = times;
    traj.states.assign(times.size(), u);
    return traj;
}

Observable window_obs(double t0, double t1, PointwiseMap g, double phi = 1.0) {
    Observable obs;
    obs.t_begin = t0;
    obs.t_end = t1;
    obs.map = g;
    obs.phi.value = phi;
    return obs;
}

NsModel small_model(double nu = 1e-2) {
    NSConfig cfg;
    cfg.viscosity = nu;
    cfg.grid = Grid2(16);
    cfg.dt = 1.0 / 256.0;
    cfg.t_end = 0.25;
    return NsModel(cfg);
}

}  // namespace

TEST_CASE("normalized average of a constant field recovers the constant") {
    const double dt_window = 0.25;
    Observable obs = window_obs(0.0, dt_window, PointwiseMap::component,
                                1.0 / (two_pi * two_pi * dt_window));
    Trajectory traj = constant_trajectory(Grid2(8), 0.37, {0.0, 0.125, 0.25});
    std::vector<double> v = evaluate(obs, traj);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("sine integrates to zero; zero field gives g(0) * integral of phi") {
    Grid2 g(8);
    SpectralField sine(g);
    sine.at(0, 1, 0) = complexd(0.0, -0.5);
    sine.at(0, -1, 0) = complexd(0.0, 0.5);
    Trajectory traj;
    traj.times = {0.0, 0.5, 1.0};
    traj.states.assign(3, sine);
    Observable obs = window_obs(0.0, 1.0, PointwiseMap::component);
    CHECK(std::abs(evaluate(obs, traj)[0]) <= 1e-12);

    Trajectory zero = constant_trajectory(g, 0.0, {0.0, 0.5, 1.0});
    // g identity of the zero field integrates to zero; the sigmoid of |0|^2
    // does too (tanh 0 = 0).
    CHECK(evaluate(window_obs(0.0, 1.0, PointwiseMap::identity), zero)[0] == 0.0);
    CHECK(evaluate(window_obs(0.0, 1.0, PointwiseMap::sigmoid_energy), zero)[0] == 0.0);
}

TEST_CASE("identity map returns the full component vector") {
    Trajectory traj = constant_trajectory(Grid2(8), 1.5, {0.0, 1.0});
    Observable obs = window_obs(0.0, 1.0, PointwiseMap::identity);
    std::vector<double> v = evaluate(obs, traj);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(1.5 * two_pi * two_pi).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("window validation") {
    Trajectory traj = constant_trajectory(Grid2(8), 1.0, {0.0, 0.5, 1.0});
    CHECK_THROWS_AS(evaluate(window_obs(0.0, 2.0, PointwiseMap::identity), traj),
                    std::invalid_argument);
    CHECK_THROWS_AS(evaluate(window_obs(0.1, 0.6, PointwiseMap::identity), traj),
                    std::invalid_argument);  // endpoints missing
    Observable bad = window_obs(0.5, 0.5, PointwiseMap::identity);
    CHECK_THROWS_AS(evaluate(bad, traj), std::invalid_argument);
}

TEST_CASE("lipschitz estimate: closed form and scaling") {
    Observable obs = window_obs(0.0, 1.0, PointwiseMap::identity);
    CHECK(lipschitz_estimate(obs, 2) == doctest::Approx(two_pi).epsilon(1e-14));
    CHECK(lipschitz_estimate(obs, 1) == doctest::Approx(std::sqrt(two_pi)).epsilon(1e-14));

    Observable zero_phi = obs;
    zero_phi.phi.value = 0.0;
    CHECK(lipschitz_estimate(zero_phi, 2) == 0.0);

    Observable scaled = obs;
    scaled.phi.value = 3.0;
    CHECK(lipschitz_estimate(scaled, 2) ==
          doctest::Approx(3.0 * lipschitz_estimate(obs, 2)).epsilon(1e-14));

    // The sigmoid map has a finite global Lipschitz constant near 1.11.
    CHECK(pointwise_lipschitz(PointwiseMap::sigmoid_energy) > 1.0);
    CHECK(pointwise_lipschitz(PointwiseMap::sigmoid_energy) < 1.2);
}

TEST_CASE("evaluate is Lipschitz with the recorded constant") {
    NsModel model = small_model();
    PriorSpec spec;
    spec.k_max = 4;
    const std::vector<double> snaps = {0.0625, 0.125, 0.1875, 0.25};
    Observable obs = window_obs(0.0, 0.25, PointwiseMap::identity);
    const double lg = lipschitz_estimate(obs, 2);

    SpectralField a0 = sample_prior_field(spec, Grid2(16), 31, 0);
    SpectralField b0 = sample_prior_field(spec, Grid2(16), 31, 1);
    Trajectory ta = model.segment(model.prepare_initial(a0), 0.0, 0.25, snaps);
    Trajectory tb = model.segment(model.prepare_initial(b0), 0.0, 0.25, snaps);

    std::vector<double> ga = evaluate(obs, ta);
    std::vector<double> gb = evaluate(obs, tb);
    double diff = 0.0;
    for (std::size_t c = 0; c < ga.size(); ++c) diff += (ga[c] - gb[c]) * (ga[c] - gb[c]);
    diff = std::sqrt(diff);

    // Trapezoid bound on int ||u - u'|| dt over the shared snapshots.
    double path = 0.0;
    for (std::size_t i = 0; i + 1 < ta.size(); ++i) {
        const double d0 = l2_distance(ta.states[i], tb.states[i]);
        const double d1 = l2_distance(ta.states[i + 1], tb.states[i + 1]);
        path += 0.5 * (d0 + d1) * (ta.times[i + 1] - ta.times[i]);
    }
    CHECK(diff <= lg * path * (1 + 1e-6));
}

TEST_CASE("measurement synthesis: zero-noise limit, determinism, 3-sigma") {
    NsModel model = small_model(0.1);
    std::vector<Observable> windows =
        tile_windows(2, 0.25, window_obs(0.0, 0.25, PointwiseMap::identity));
    const std::vector<double> snaps = {0.0625, 0.125, 0.1875, 0.25};
    SpectralField tg = model.prepare_initial(taylor_green(Grid2(16)));
    Trajectory truth = model.segment(tg, 0.0, 0.25, snaps);

    const NoiseModel nm = NoiseModel::gaussian(identity_matrix(2), 2);

    MeasurementSet exact = synthesize_measurements(truth, windows, nm, 5, "tg", 0.0);
    for (std::size_t j = 0; j < windows.size(); ++j) {
        std::vector<double> g = evaluate(windows[j], truth);
        for (std::size_t c = 0; c < g.size(); ++c)
            CHECK(exact.values[j][c] == doctest::Approx(g[c]).epsilon(1e-14));
    }

    MeasurementSet a = synthesize_measurements(truth, windows, nm, 5, "tg", 1.0);
    MeasurementSet b = synthesize_measurements(truth, windows, nm, 5, "tg", 1.0);
    CHECK(a.values == b.values);

    // Taylor-Green window averages of the identity observable vanish by
    // symmetry, so measurements are pure noise; 5 sigma (of the stacked
    // vector) is a comfortable determinism-friendly bound.
    for (std::size_t j = 0; j < a.values.size(); ++j)
        for (double v : a.values[j]) CHECK(std::abs(v) <= 5.0);
}

TEST_CASE("noise sample moments match Gamma") {
    std::vector<double> gamma = {0.8, 0.3, 0.3, 0.5};
    const NoiseModel nm = NoiseModel::gaussian(gamma, 2);
    RngStream rng(2024, 0);
    const int n = 100000;
    double c00 = 0, c01 = 0, c11 = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> y = nm.sample(rng);
        c00 += y[0] * y[0];
        c01 += y[0] * y[1];
        c11 += y[1] * y[1];
    }
    c00 /= n;
    c01 /= n;
    c11 /= n;
    CHECK(std::abs(c00 - gamma[0]) <= 0.05 * gamma[0]);
    CHECK(std::abs(c11 - gamma[3]) <= 0.05 * gamma[3]);
    CHECK(std::abs(c01 - gamma[1]) <= 0.05 * std::sqrt(gamma[0] * gamma[3]));
}
