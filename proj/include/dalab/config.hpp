#pragma once

#include <string>
#include <vector>

#include "dalab/fv_solver.hpp"
#include "dalab/observable.hpp"
#include "dalab/prior.hpp"
#include "dalab/toml_lite.hpp"

namespace dalab {

/// Resolved experiment configuration. Defaults give desk-scale runs; every
/// field can be overridden from the TOML file. The config hash is computed
/// from the resolved fields in canonical order, so it is independent of key
/// order in the file and of non-semantic settings (threads, output paths).
struct ExperimentConfig {
    std::string experiment = "stability";
    std::string model = "ns2d";
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int threads = 1;
    bool resample = false;  // demo-only systematic resampling

    PriorSpec prior;
    std::size_t n_members = 12;

    // Navier-Stokes lane.
    double viscosity = 1e-2;
    std::vector<double> viscosity_list;
    int n_modes = 32;
    std::vector<double> n_sweep;        // N values
    int n_ref = 96;
    double t_end = 0.25;
    std::size_t n_stages = 2;
    double u_scale = 1.0;               // velocity scale for the dt rule
    double cfl_fraction = 0.4;
    std::size_t quad_per_stage = 8;     // d_T interior nodes per stage
    std::size_t snaps_per_stage = 8;    // stored snapshot interior nodes

    // Conservation-law lane.
    std::size_t n_cells = 128;
    std::vector<double> n_cells_sweep;
    std::string flux = "rusanov";
    double fv_t_end = 1.0;
    double fv_cfl = 0.8;

    // Observables. The default spatial weight cos(x) pairs with an active
    // Fourier mode; a constant phi with the identity map would observe only
    // the (zero) mean mode and the filter would never reweight.
    std::string g_kind = "identity";
    int g_component = 0;
    double phi_value = 1.0;
    std::string phi_kind = "cosine";
    double phi_ax = 1.0;
    double phi_ay = 0.0;

    // Noise.
    std::string noise_kind = "gaussian";
    std::vector<double> gamma_diag = {1e-2, 1e-2};
    double mixture_weight = 0.8;
    double kappa = 3.0;
    double noise_scale = 1.0;

    // Measurements.
    std::string measurement_source = "synthesize";  // or a JSON file path
    std::string truth = "prior-draw";               // or "taylor-green"
    std::uint64_t truth_member = 900001;            // stream id of the truth draw
    std::uint64_t noise_seed = 77;

    // Stability probe schedule (radii relative to |y|_Gamma).
    std::vector<double> perturbation_radii = {0.05, 0.08, 0.12, 0.18, 0.27, 0.4};

    // Structure-function radii.
    std::vector<double> structure_radii = {0.05, 0.1, 0.2, 0.4};

    static ExperimentConfig from_toml_file(const std::string& path);
    static ExperimentConfig from_toml(const TomlTable& t);

    /// Canonical serialization of the semantically relevant fields.
    std::string canonical() const;
    /// FNV-1a hash of canonical(), as 16 hex digits.
    std::string hash() const;

    /// Steps per stage for truncation N: smallest integer multiple of
    /// (snaps_per_stage+1) with dt <= cfl_fraction / (N * u_scale).
    std::size_t steps_per_stage(int n_modes_value) const;

    void validate() const;
};

}  // namespace dalab
