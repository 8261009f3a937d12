#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dalab/config.hpp"
#include "dalab/toml_lite.hpp"

using namespace dalab;

TEST_CASE("toml subset: scalars, arrays, tables, comments") {
    const std::string text = R"(
# top comment
experiment = "stability"
seed = 42

[prior]
alpha = 2.5          # decay
k_max = 6
divergence_free = true

[ns]
nu_list = [1e-2, 1e-3]
n_sweep = [16, 32, 64]

[observe]
g = "identity"

[noise]
gamma_diag = [0.01, 0.01]
)";
    TomlTable t = TomlTable::parse(text);
    CHECK(t.get_string("experiment") == "stability");
    CHECK(t.get_integer("seed") == 42);
    CHECK(t.get_number("prior.alpha") == doctest::Approx(2.5));
    CHECK(t.get_integer("prior.k_max") == 6);
    CHECK(t.get_bool("prior.divergence_free", false));
    CHECK(t.get_number_array("ns.nu_list") == std::vector<double>{1e-2, 1e-3});
    CHECK(t.get_number_array("ns.n_sweep").size() == 3);
    CHECK(t.get_string("observe.g") == "identity");
    CHECK_FALSE(t.contains("missing.key"));
    CHECK_THROWS_AS(t.get_string("missing.key"), ConfigError);
    CHECK_THROWS_AS(t.get_number("experiment"), std::invalid_argument);
}

TEST_CASE("toml parse errors") {
    CHECK_THROWS_AS(TomlTable::parse("key value-without-equals"), std::invalid_argument);
    CHECK_THROWS_AS(TomlTable::parse("[unterminated\nk = 1"), std::invalid_argument);
    CHECK_THROWS_AS(TomlTable::parse("k = zzz"), ConfigError);
}

TEST_CASE("config resolution from toml with defaults") {
    TomlTable t = TomlTable::parse(R"(
experiment = "equivalence"
model = "ns2d"
[prior]
n_members = 24
[ns]
n_modes = 16
n_stages = 4
)");
    ExperimentConfig cfg = ExperimentConfig::from_toml(t);
    CHECK(cfg.experiment == "equivalence");
    CHECK(cfg.n_members == 24);
    CHECK(cfg.n_modes == 16);
    CHECK(cfg.n_stages == 4);
    CHECK(cfg.viscosity == doctest::Approx(1e-2));  // default survives
}

TEST_CASE("config hash is stable under key reordering and sensitive to values") {
    TomlTable a = TomlTable::parse(
        "seed = 7\nexperiment = \"stability\"\n[prior]\nk_max = 5\nalpha = 2.0");
    TomlTable b = TomlTable::parse(
        "experiment = \"stability\"\nseed = 7\n[prior]\nalpha = 2.0\nk_max = 5");
    ExperimentConfig ca = ExperimentConfig::from_toml(a);
    ExperimentConfig cb = ExperimentConfig::from_toml(b);
    CHECK(ca.hash() == cb.hash());

    ExperimentConfig cc = ca;
    cc.seed = 8;
    CHECK(cc.hash() != ca.hash());
    ExperimentConfig cd = ca;
    cd.prior.alpha += 0.1;
    CHECK(cd.hash() != ca.hash());

    // Non-semantic fields do not move the hash.
    ExperimentConfig ce = ca;
    ce.threads = 16;
    ce.out_dir = "elsewhere";
    CHECK(ce.hash() == ca.hash());
}

TEST_CASE("steps_per_stage honors the CFL rule and the snapshot grouping") {
    ExperimentConfig cfg;
    cfg.t_end = 0.25;
    cfg.n_stages = 2;
    cfg.u_scale = 1.0;
    cfg.cfl_fraction = 0.4;
    cfg.snaps_per_stage = 9;
    const double stage_len = 0.125;
    for (int n : {16, 24, 32, 64, 96}) {
        const std::size_t sps = cfg.steps_per_stage(n);
        CHECK(sps % 10 == 0);  // divisible by snaps_per_stage + 1
        CHECK(stage_len / static_cast<double>(sps) <= 0.4 / n + 1e-15);
    }
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.perturbation_radii = {0.2, 0.1};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
