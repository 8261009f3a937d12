#include "dalab/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dalab/io.hpp"

namespace dalab {

ExperimentConfig ExperimentConfig::from_toml_file(const std::string& path) {
    return from_toml(TomlTable::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_toml(const TomlTable& t) {
    ExperimentConfig c;
    c.experiment = t.get_string("experiment", c.experiment);
    c.model = t.get_string("model", c.model);
    c.seed = static_cast<std::uint64_t>(t.get_integer("seed", 1));

    c.prior.alpha = t.get_number("prior.alpha", c.prior.alpha);
    c.prior.k_max = static_cast<int>(t.get_integer("prior.k_max", c.prior.k_max));
    c.prior.support_radius = t.get_number("prior.support_radius", c.prior.support_radius);
    c.prior.sigma = t.get_number("prior.sigma", c.prior.sigma);
    c.prior.divergence_free = t.get_bool("prior.divergence_free", true);
    c.n_members = static_cast<std::size_t>(t.get_integer("prior.n_members", 12));

    c.viscosity = t.get_number("ns.nu", c.viscosity);
    c.viscosity_list = t.get_number_array("ns.nu_list", {});
    c.n_modes = static_cast<int>(t.get_integer("ns.n_modes", c.n_modes));
    c.n_sweep = t.get_number_array("ns.n_sweep", {});
    c.n_ref = static_cast<int>(t.get_integer("ns.n_ref", c.n_ref));
    c.t_end = t.get_number("ns.t_end", c.t_end);
    c.n_stages = static_cast<std::size_t>(t.get_integer("ns.n_stages", 2));
    c.u_scale = t.get_number("ns.u_scale", c.u_scale);
    c.cfl_fraction = t.get_number("ns.cfl_fraction", c.cfl_fraction);
    c.quad_per_stage = static_cast<std::size_t>(t.get_integer("ns.quad_per_stage", 8));
    c.snaps_per_stage = static_cast<std::size_t>(t.get_integer("ns.snaps_per_stage", 8));

    c.n_cells = static_cast<std::size_t>(t.get_integer("fv.n_cells", 128));
    c.n_cells_sweep = t.get_number_array("fv.n_cells_sweep", {});
    c.flux = t.get_string("fv.flux", c.flux);
    c.fv_t_end = t.get_number("fv.t_end", c.fv_t_end);
    c.fv_cfl = t.get_number("fv.cfl", c.fv_cfl);

    c.g_kind = t.get_string("observe.g", c.g_kind);
    c.g_component = static_cast<int>(t.get_integer("observe.component", 0));
    c.phi_value = t.get_number("observe.phi_value", c.phi_value);
    c.phi_kind = t.get_string("observe.phi", c.phi_kind);
    c.phi_ax = t.get_number("observe.phi_ax", c.phi_ax);
    c.phi_ay = t.get_number("observe.phi_ay", c.phi_ay);

    c.noise_kind = t.get_string("noise.kind", c.noise_kind);
    c.gamma_diag = t.get_number_array("noise.gamma_diag", c.gamma_diag);
    c.mixture_weight = t.get_number("noise.mixture_weight", c.mixture_weight);
    c.kappa = t.get_number("noise.kappa", c.kappa);
    c.noise_scale = t.get_number("noise.scale", c.noise_scale);

    c.measurement_source = t.get_string("measurements.source", c.measurement_source);
    c.truth = t.get_string("measurements.truth", c.truth);
    c.truth_member =
        static_cast<std::uint64_t>(t.get_integer("measurements.truth_member", 900001));
    c.noise_seed = static_cast<std::uint64_t>(t.get_integer("measurements.noise_seed", 77));

    c.perturbation_radii = t.get_number_array("stability.radii", c.perturbation_radii);
    c.structure_radii = t.get_number_array("structure.radii", c.structure_radii);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    prior.validate();
    require(n_members >= 1, "config: need at least one member");
    require(!perturbation_radii.empty(), "config: perturbation radii must be nonempty");
    require(!structure_radii.empty(), "config: structure radii must be nonempty");
    for (std::size_t i = 1; i < perturbation_radii.size(); ++i)
        require(perturbation_radii[i] > perturbation_radii[i - 1],
                "config: perturbation radii must increase");
}

std::size_t ExperimentConfig::steps_per_stage(int n_modes_value) const {
    const double stage_len = t_end / static_cast<double>(n_stages);
    const double dt_max = cfl_fraction / (static_cast<double>(n_modes_value) * u_scale);
    const std::size_t group = snaps_per_stage + 1;
    std::size_t steps = static_cast<std::size_t>(std::ceil(stage_len / dt_max));
    steps = ((steps + group - 1) / group) * group;  // divisible by group
    return std::max(steps, group);
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream ss;
    auto num = [&](const char* key, double v) { ss << key << "=" << format_double(v) << ";"; };
    auto str = [&](const char* key, const std::string& v) { ss << key << "=" << v << ";"; };
    auto arr = [&](const char* key, const std::vector<double>& v) {
        ss << key << "=[";
        for (double x : v) ss << format_double(x) << ",";
        ss << "];";
    };
    str("experiment", experiment);
    str("model", model);
    num("seed", static_cast<double>(seed));
    num("prior.alpha", prior.alpha);
    num("prior.k_max", prior.k_max);
    num("prior.support_radius", prior.support_radius);
    num("prior.sigma", prior.sigma);
    num("prior.divergence_free", prior.divergence_free ? 1 : 0);
    num("n_members", static_cast<double>(n_members));
    num("ns.nu", viscosity);
    arr("ns.nu_list", viscosity_list);
    num("ns.n_modes", n_modes);
    arr("ns.n_sweep", n_sweep);
    num("ns.n_ref", n_ref);
    num("ns.t_end", t_end);
    num("ns.n_stages", static_cast<double>(n_stages));
    num("ns.u_scale", u_scale);
    num("ns.cfl_fraction", cfl_fraction);
    num("ns.quad_per_stage", static_cast<double>(quad_per_stage));
    num("ns.snaps_per_stage", static_cast<double>(snaps_per_stage));
    num("fv.n_cells", static_cast<double>(n_cells));
    arr("fv.n_cells_sweep", n_cells_sweep);
    str("fv.flux", flux);
    num("fv.t_end", fv_t_end);
    num("fv.cfl", fv_cfl);
    str("observe.g", g_kind);
    num("observe.component", g_component);
    num("observe.phi_value", phi_value);
    str("observe.phi", phi_kind);
    num("observe.phi_ax", phi_ax);
    num("observe.phi_ay", phi_ay);
    str("noise.kind", noise_kind);
    arr("noise.gamma_diag", gamma_diag);
    num("noise.mixture_weight", mixture_weight);
    num("noise.kappa", kappa);
    num("noise.scale", noise_scale);
    str("measurements.source", measurement_source);
    str("measurements.truth", truth);
    num("measurements.truth_member", static_cast<double>(truth_member));
    num("measurements.noise_seed", static_cast<double>(noise_seed));
    arr("stability.radii", perturbation_radii);
    arr("structure.radii", structure_radii);
    num("resample", resample ? 1 : 0);
    return ss.str();
}

std::string ExperimentConfig::hash() const {
    const std::string s = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dalab
