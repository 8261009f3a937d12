#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "dalab/io.hpp"
#include "dalab/ns_solver.hpp"
#include "dalab/prior.hpp"

using namespace dalab;

namespace {

struct TempDir {
    std::string path;
    TempDir() {
        path = (std::filesystem::temp_directory_path() /
                ("dalab_io_" + std::to_string(::getpid())))
                   .string();
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("binary field snapshot round trip (complex64 precision)") {
    TempDir tmp;
    PriorSpec spec;
    spec.k_max = 5;
    SpectralField u = sample_prior_field(spec, Grid2(12), 5, 0);
    const std::string path = tmp.path + "/field.bin";
    save_field(u, path);
    SpectralField v = load_field(path);
    CHECK(v.grid().n_modes == 12);
    CHECK(v.divergence_free_flag() == u.divergence_free_flag());
    // float32 payload: exact at float precision.
    for (std::size_t i = 0; i < u.raw().size(); ++i) {
        CHECK(v.raw()[i].real() == static_cast<float>(u.raw()[i].real()));
        CHECK(v.raw()[i].imag() == static_cast<float>(u.raw()[i].imag()));
    }
}

TEST_CASE("JSON debug export is lossless") {
    TempDir tmp;
    PriorSpec spec;
    spec.k_max = 3;
    SpectralField u = sample_prior_field(spec, Grid2(6), 9, 1);
    const std::string path = tmp.path + "/field.json";
    save_field_json(u, path);
    SpectralField v = load_field_json(path);
    CHECK(v.raw() == u.raw());
}

TEST_CASE("trajectory archive round trip") {
    TempDir tmp;
    NSConfig cfg;
    cfg.viscosity = 0.05;
    cfg.grid = Grid2(8);
    cfg.dt = 1.0 / 64.0;
    cfg.t_end = 0.125;
    NsSolver solver(cfg);
    Trajectory traj = solver.solve(taylor_green(Grid2(8)), {0.0625, 0.125});
    save_trajectory(traj, tmp.path + "/traj", cfg.viscosity, cfg.dt, cfg.t_end, "seed=1");
    Trajectory back = load_trajectory(tmp.path + "/traj");
    CHECK(back.times == traj.times);
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        CHECK(l2_distance(back.states[i], traj.states[i]) <= 1e-6 * l2_norm(traj.states[i]));
}

TEST_CASE("cell field CSV and binary round trips") {
    TempDir tmp;
    CellField u = sample_cells(32, [](double x) { return std::sin(3 * x) + 0.2; });
    save_cells_csv(u, tmp.path + "/cells.csv");
    CellField v = load_cells_csv(tmp.path + "/cells.csv");
    REQUIRE(v.n_cells() == 32);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(v[i] == u[i]);  // %.17g round-trips doubles exactly

    save_cells(u, tmp.path + "/cells.bin");
    CellField w = load_cells(tmp.path + "/cells.bin");
    CHECK(w.values == u.values);  // float64 payload is bit-exact
}

TEST_CASE("ensemble archive round trip") {
    TempDir tmp;
    PriorSpec spec;
    spec.k_max = 4;
    auto ens = sample_prior(spec, Grid2(8), 5, 77);
    ens.log_weights = {-1.0, -2.0, -0.5, -3.0, -1.5};
    ens.normalize();
    save_ensemble(ens, spec, 77, tmp.path + "/ens");
    auto back = load_ensemble(tmp.path + "/ens");
    REQUIRE(back.size() == 5);
    CHECK(back.log_weights == ens.log_weights);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(l2_distance(back.members[i], ens.members[i]) <=
              1e-6 * std::max(1e-12, l2_norm(ens.members[i])));
}

TEST_CASE("missing files raise invalid-argument errors") {
    CHECK_THROWS_AS(load_field("/nonexistent/file.bin"), std::invalid_argument);
    CHECK_THROWS_AS(load_trajectory("/nonexistent"), std::invalid_argument);
}
