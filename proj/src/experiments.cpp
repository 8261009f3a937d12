#include "dalab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dalab/io.hpp"
#include "dalab/metric.hpp"
#include "dalab/model.hpp"
#include "dalab/structure.hpp"

namespace dalab {

namespace {

using Clock = std::chrono::steady_clock;

struct Stopwatch {
    Clock::time_point t0 = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }
};

std::string fmt(double v) { return format_double(v); }

int ns_obs_dim(const ExperimentConfig& cfg) {
    return pointwise_map_from_string(cfg.g_kind) == PointwiseMap::identity ? 2 : 1;
}

std::vector<double> expand_gamma(const ExperimentConfig& cfg, int d) {
    std::vector<double> diag = cfg.gamma_diag;
    if (diag.size() == 1 && d > 1) diag.assign(d, diag[0]);
    require(static_cast<int>(diag.size()) == d,
            "config: gamma_diag dimension does not match the observable");
    return diagonal_matrix(diag);
}

NoiseModel build_noise(const ExperimentConfig& cfg, int d) {
    const std::vector<double> gamma = expand_gamma(cfg, d);
    if (cfg.noise_kind == "gaussian") return NoiseModel::gaussian(gamma, d);
    if (cfg.noise_kind == "gaussian_mixture")
        return NoiseModel::heavy_tail(gamma, d, cfg.mixture_weight, cfg.kappa);
    throw ConfigError("config: unsupported filter noise kind " + cfg.noise_kind);
}

Observable observable_proto(const ExperimentConfig& cfg) {
    Observable obs;
    obs.map = pointwise_map_from_string(cfg.g_kind);
    obs.component = cfg.g_component;
    obs.phi.kind = cfg.phi_kind == "cosine" ? SpatialWeight::Kind::cosine
                                            : SpatialWeight::Kind::constant;
    obs.phi.value = cfg.phi_value;
    obs.phi.ax = cfg.phi_ax;
    obs.phi.ay = cfg.phi_ay;
    return obs;
}

NsModel make_ns_model(const ExperimentConfig& cfg, int n_modes, double nu) {
    const double stage_len = cfg.t_end / static_cast<double>(cfg.n_stages);
    const std::size_t sps = cfg.steps_per_stage(n_modes);
    NSConfig nscfg;
    nscfg.viscosity = nu;
    nscfg.grid = Grid2(n_modes);
    nscfg.dt = stage_len / static_cast<double>(sps);
    nscfg.t_end = cfg.t_end;
    return NsModel(nscfg);
}

std::vector<double> ns_breakpoints(const ExperimentConfig& cfg) {
    std::vector<double> b;
    const double stage_len = cfg.t_end / static_cast<double>(cfg.n_stages);
    for (std::size_t j = 0; j <= cfg.n_stages; ++j)
        b.push_back(stage_len * static_cast<double>(j));
    return b;
}

SpectralField ns_truth_field(const ExperimentConfig& cfg, Grid2 grid) {
    if (cfg.truth == "taylor-green") return taylor_green(grid);
    return sample_prior_field(cfg.prior, grid, cfg.seed, cfg.truth_member);
}

/// Synthesize y on the given model (or load from file when configured).
MeasurementSet ns_measurements(const ExperimentConfig& cfg, const NsModel& model,
                               const std::vector<Observable>& windows, const NoiseModel& nm) {
    if (cfg.measurement_source != "synthesize") return load_measurements(cfg.measurement_source);
    const std::vector<double> snaps =
        stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
    SpectralField u0 = model.prepare_initial(ns_truth_field(cfg, model.config().grid));
    Trajectory truth = model.segment(u0, 0.0, cfg.t_end, snaps);
    return synthesize_measurements(truth, windows, nm, cfg.noise_seed, cfg.truth,
                                   cfg.noise_scale);
}

/// y' = y + radius_rel * |y|_Gamma * Gamma^{1/2} e / |e|_2, direction e keyed
/// by (seed, probe id); stacked Gamma-distance is then radius_rel*|y|_Gamma.
MeasurementSet perturb_measurements(const MeasurementSet& ms, const NoiseModel& nm,
                                    double radius_rel, std::uint64_t seed,
                                    std::uint64_t probe_id) {
    MeasurementSet out = ms;
    const int d = nm.dim();
    const std::size_t stages = ms.values.size();
    RngStream rng(seed, 0xabc0u + probe_id);
    std::vector<double> e(stages * static_cast<std::size_t>(d));
    double norm2 = 0.0;
    for (double& v : e) {
        v = rng.normal();
        norm2 += v * v;
    }
    const double scale = radius_rel * ms.stacked_gamma_norm(nm) / std::sqrt(norm2);
    const auto L = cholesky(nm.gamma(), d);
    for (std::size_t j = 0; j < stages; ++j)
        for (int i = 0; i < d; ++i) {
            double add = 0.0;
            for (int k = 0; k <= i; ++k)
                add += L[static_cast<std::size_t>(i) * d + k] *
                       e[j * static_cast<std::size_t>(d) + k];
            out.values[j][i] += scale * add;
        }
    return out;
}

void write_dt_outputs(const std::string& out_dir, const std::string& tag, const DTResult& res,
                      RunRecord& rec) {
    {
        CsvWriter csv(out_dir + "/" + tag + ".csv", {"t", "W1"});
        for (std::size_t i = 0; i < res.times.size(); ++i)
            csv.row({res.times[i], res.w1_values[i]});
    }
    nlohmann::ordered_json j;
    j["d_T"] = res.d_t;
    j["sup_W1"] = res.sup_w1;
    j["plan_stats"] = {{"max_augmentations", res.max_plan_augmentations},
                       {"max_marginal_residual", res.max_marginal_residual}};
    std::ofstream out(out_dir + "/" + tag + "_summary.json");
    out << j.dump(2) << "\n";
    rec.artifacts.push_back(tag + ".csv");
    rec.artifacts.push_back(tag + "_summary.json");
}

double ensemble_moment2(const WeightedEnsemble<SpectralField>& ens) {
    return moment(ens, 2, [](const SpectralField& u) { return l2_norm(u); });
}

/// sup over stage intervals of the empirical density ratio n * max w.
template <class State>
double weight_sup_over_segments(const FilteringDistribution<State>& fd) {
    double sup = 1.0;
    const double n = static_cast<double>(fd.n_members());
    for (std::size_t j = 0; j + 1 < fd.stage_log_weights.size(); ++j) {
        double wmax = -std::numeric_limits<double>::infinity();
        for (double lw : fd.stage_log_weights[j]) wmax = std::max(wmax, lw);
        sup = std::max(sup, n * std::exp(wmax));
    }
    return sup;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stability (ns2d): fitted Lipschitz constants of y -> filtering distribution.
// ---------------------------------------------------------------------------

RunRecord exp_stability(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "stability";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    std::vector<double> n_sweep = cfg.n_sweep.empty() ? std::vector<double>{16, 32, 64}
                                                      : cfg.n_sweep;
    std::vector<double> nus = cfg.viscosity_list.empty() ? std::vector<double>{1e-2, 1e-3}
                                                         : cfg.viscosity_list;

    const int d = ns_obs_dim(cfg);
    const NoiseModel nm = build_noise(cfg, d);
    std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end,
                                                   observable_proto(cfg));

    CsvWriter fits(cfg.out_dir + "/stability_fit.csv",
                   {"N", "nu", "C_hat", "max_ratio", "sup_C_hat", "n_probes"});
    rec.artifacts.push_back("stability_fit.csv");

    double c_min = std::numeric_limits<double>::infinity();
    double c_max = 0.0;
    bool ratios_ok = true;
    bool all_finite = true;

    for (double nval : n_sweep) {
        const int N = static_cast<int>(nval);
        for (double nu : nus) {
            NsModel model = make_ns_model(cfg, N, nu);
            const std::vector<double> snaps =
                stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
            WeightedEnsemble<SpectralField> prior =
                sample_prior(cfg.prior, model.config().grid, cfg.n_members, cfg.seed);
            MeasurementSet ms = ns_measurements(cfg, model, windows, nm);
            auto fd_base = filter_recursive(model, prior, windows, ms, nm, snaps);

            std::vector<double> xs, ys, ys_sup;
            for (std::size_t pi = 0; pi < cfg.perturbation_radii.size(); ++pi) {
                MeasurementSet ms_p = perturb_measurements(ms, nm, cfg.perturbation_radii[pi],
                                                           cfg.seed, pi);
                auto fd_p = filter_recursive(model, prior, windows, ms_p, nm, snaps);
                DTResult res = d_T(fd_base, fd_p,
                                   [](const SpectralField& a, const SpectralField& b) {
                                       return l2_distance(a, b);
                                   },
                                   cfg.quad_per_stage);
                const double x = MeasurementSet::stacked_distance(ms, ms_p, nm);
                xs.push_back(x);
                ys.push_back(res.d_t);
                ys_sup.push_back(res.sup_w1);
                std::ostringstream tag;
                tag << "w1_N" << N << "_nu" << fmt(nu) << "_r" << pi;
                write_dt_outputs(cfg.out_dir, tag.str(), res, rec);
            }
            LipschitzFit fit = lipschitz_fit(xs, ys);
            LipschitzFit fit_sup = lipschitz_fit(xs, ys_sup);
            fits.row({static_cast<double>(N), nu, fit.slope, fit.max_ratio, fit_sup.slope,
                      static_cast<double>(xs.size())});
            all_finite = all_finite && std::isfinite(fit.slope) && fit.slope > 0.0;
            ratios_ok = ratios_ok && fit.max_ratio <= 1.2 * fit.slope;
            c_min = std::min(c_min, fit.slope);
            c_max = std::max(c_max, fit.slope);
        }
    }

    rec.criteria.push_back({"stability_C_finite", all_finite,
                            "C_hat in [" + fmt(c_min) + ", " + fmt(c_max) + "]"});
    rec.criteria.push_back({"stability_max_ratio_within_1.2x", ratios_ok, ""});
    rec.criteria.push_back({"stability_C_variation_2x", c_max <= 2.0 * c_min,
                            "max/min = " + fmt(c_max / c_min)});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// Consistency (ns2d): d_T(nu^Delta, nu^ref) against the forward L2(mu) error.
// ---------------------------------------------------------------------------

RunRecord exp_consistency(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "consistency";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    std::vector<double> n_sweep = cfg.n_sweep.empty() ? std::vector<double>{16, 24, 32}
                                                      : cfg.n_sweep;
    for (double nval : n_sweep)
        require(static_cast<int>(nval) < cfg.n_ref,
                "consistency: reference resolution must be strictly finer than the sweep");

    const int d = ns_obs_dim(cfg);
    const NoiseModel nm = build_noise(cfg, d);
    std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end,
                                                   observable_proto(cfg));

    NsModel ref_model = make_ns_model(cfg, cfg.n_ref, cfg.viscosity);
    const std::vector<double> snaps =
        stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, ref_model.dt());
    MeasurementSet ms = ns_measurements(cfg, ref_model, windows, nm);

    WeightedEnsemble<SpectralField> prior_ref =
        sample_prior(cfg.prior, ref_model.config().grid, cfg.n_members, cfg.seed);
    auto fd_ref = filter_recursive(ref_model, prior_ref, windows, ms, nm, snaps);

    CsvWriter series(cfg.out_dir + "/consistency.csv", {"N", "lhs_dT", "rhs_forward_error"});
    rec.artifacts.push_back("consistency.csv");

    std::vector<double> lhs, rhs;
    for (double nval : n_sweep) {
        const int N = static_cast<int>(nval);
        NsModel model = make_ns_model(cfg, N, cfg.viscosity);
        WeightedEnsemble<SpectralField> prior =
            sample_prior(cfg.prior, model.config().grid, cfg.n_members, cfg.seed);
        auto fd = filter_recursive(model, prior, windows, ms, nm, snaps);

        DTResult res = d_T(fd, fd_ref,
                           [](const SpectralField& a, const SpectralField& b) {
                               return l2_distance_band(a, b);
                           },
                           cfg.quad_per_stage);

        // Forward error: trapezoid over the stored snapshot grid of
        // ||S^Delta_t - S^ref_t||_{L2(mu_prior)} (uniform prior weights).
        double err_integral = 0.0;
        for (std::size_t j = 0; j < fd.segments.size(); ++j) {
            const auto& seg = fd.segments[j];
            const auto& seg_ref = fd_ref.segments[j];
            std::vector<double> rms(seg.times.size(), 0.0);
            for (std::size_t s = 0; s < seg.times.size(); ++s) {
                double acc = 0.0;
                for (std::size_t i = 0; i < fd.n_members(); ++i) {
                    const double e =
                        l2_distance_band(seg.member_states[i][s], seg_ref.member_states[i][s]);
                    acc += e * e;
                }
                rms[s] = std::sqrt(acc / static_cast<double>(fd.n_members()));
            }
            for (std::size_t s = 0; s + 1 < seg.times.size(); ++s)
                err_integral += 0.5 * (rms[s] + rms[s + 1]) * (seg.times[s + 1] - seg.times[s]);
        }

        series.row({static_cast<double>(N), res.d_t, err_integral});
        lhs.push_back(res.d_t);
        rhs.push_back(err_integral);
        std::ostringstream tag;
        tag << "w1_consistency_N" << N;
        write_dt_outputs(cfg.out_dir, tag.str(), res, rec);
    }

    bool lhs_monotone = true, rhs_monotone = true;
    for (std::size_t i = 1; i < lhs.size(); ++i) {
        lhs_monotone = lhs_monotone && lhs[i] < lhs[i - 1];
        rhs_monotone = rhs_monotone && rhs[i] < rhs[i - 1];
    }
    const double c_fit = lhs.front() / rhs.front();
    bool inequality = true;
    for (std::size_t i = 1; i < lhs.size(); ++i)
        inequality = inequality && lhs[i] <= c_fit * rhs[i];

    rec.criteria.push_back({"consistency_lhs_monotone", lhs_monotone, ""});
    rec.criteria.push_back({"consistency_rhs_monotone", rhs_monotone, ""});
    rec.criteria.push_back(
        {"consistency_inequality_with_coarse_C", inequality, "C = " + fmt(c_fit)});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// Compactness (ns2d): structure-function bounds and Cauchy diagnostics.
// ---------------------------------------------------------------------------

RunRecord exp_compactness(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "compactness";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    std::vector<double> n_sweep = cfg.n_sweep.empty() ? std::vector<double>{16, 32, 64}
                                                      : cfg.n_sweep;
    const int d = ns_obs_dim(cfg);
    const NoiseModel nm = build_noise(cfg, d);
    std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end,
                                                   observable_proto(cfg));

    CsvWriter csv(cfg.out_dir + "/structure.csv", {"Delta", "r", "S2T", "bound", "kind"});
    rec.artifacts.push_back("structure.csv");
    CsvWriter cauchy(cfg.out_dir + "/cauchy.csv", {"N_coarse", "N_fine", "d_T"});
    rec.artifacts.push_back("cauchy.csv");

    bool prior_bound_ok = true, post_bound_ok = true, oracle_ok = true;
    double worst_oracle_gap = 0.0;

    std::vector<FilteringDistribution<SpectralField>> posts;
    MeasurementSet ms;
    {
        NsModel ref_model = make_ns_model(cfg, static_cast<int>(n_sweep.back()),
                                          cfg.viscosity);
        ms = ns_measurements(cfg, ref_model, windows, nm);
    }

    for (double nval : n_sweep) {
        const int N = static_cast<int>(nval);
        NsModel model = make_ns_model(cfg, N, cfg.viscosity);
        const std::vector<double> snaps =
            stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
        WeightedEnsemble<SpectralField> prior =
            sample_prior(cfg.prior, model.config().grid, cfg.n_members, cfg.seed);
        const double m2 = ensemble_moment2(prior);

        auto fd_prior = prior_pushforward(model, prior, cfg.t_end, snaps);
        StructureReport rep =
            structure_function(fd_prior, cfg.structure_radii, cfg.viscosity, m2, 1.0);
        for (const auto& row : rep.rows)
            csv.row_mixed({fmt(1.0 / N), fmt(row.r), fmt(row.s2t), fmt(row.bound), "prior"});
        prior_bound_ok = prior_bound_ok && rep.all_below_bound();

        auto fd_post = filter_recursive(model, prior, windows, ms, nm, snaps);
        const double wsup = weight_sup_over_segments(fd_post);
        StructureReport rep_post = structure_function(fd_post, cfg.structure_radii,
                                                      cfg.viscosity, m2, std::sqrt(wsup));
        for (const auto& row : rep_post.rows)
            csv.row_mixed({fmt(1.0 / N), fmt(row.r), fmt(row.s2t), fmt(row.bound), "posterior"});
        post_bound_ok = post_bound_ok && rep_post.all_below_bound();

        // Oracle agreement at the coarsest truncation: spectral multiplier
        // path against brute-force shift quadrature.
        if (N == static_cast<int>(n_sweep.front())) {
            const auto& seg = fd_prior.segments[0];
            const SpectralField& probe = seg.member_states[0][seg.times.size() / 2];
            for (double r : cfg.structure_radii) {
                const double spec = structure_s2(probe, r);
                const double oracle = structure_s2_shift_oracle(probe, r);
                const double gap = std::abs(spec - oracle) / std::max(oracle, 1e-300);
                worst_oracle_gap = std::max(worst_oracle_gap, gap);
                oracle_ok = oracle_ok && gap <= 0.01;
            }
        }
        posts.push_back(std::move(fd_post));
    }

    for (std::size_t i = 0; i + 1 < posts.size(); ++i) {
        DTResult res = d_T(posts[i], posts[i + 1],
                           [](const SpectralField& a, const SpectralField& b) {
                               return l2_distance_band(a, b);
                           },
                           cfg.quad_per_stage);
        cauchy.row({n_sweep[i], n_sweep[i + 1], res.d_t});
    }

    rec.criteria.push_back({"structure_prior_bound", prior_bound_ok, ""});
    rec.criteria.push_back({"structure_posterior_bound", post_bound_ok, ""});
    rec.criteria.push_back({"structure_oracle_agreement_1pct", oracle_ok,
                            "worst gap = " + fmt(worst_oracle_gap)});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// Equivalence (Prop. 3.6 / 3.4): recursive filter vs one-shot smoothing.
// ---------------------------------------------------------------------------

namespace {

template <class Model>
std::pair<double, double> equivalence_errors(
    const Model& model, const WeightedEnsemble<typename Model::State>& prior,
    const std::vector<Observable>& windows, const MeasurementSet& ms, const NoiseModel& nm,
    const std::vector<double>& snaps) {
    auto fd = filter_recursive(model, prior, windows, ms, nm, snaps);

    double worst_weight = 0.0;
    for (std::size_t k = 1; k <= ms.values.size(); ++k) {
        auto post = smoothing_posterior(model, prior, windows, ms, k, nm, snaps);
        const auto& rec_lw = fd.stage_log_weights[k];
        for (std::size_t i = 0; i < post.size(); ++i) {
            const double ws = std::exp(post.log_weights[i]);
            const double wr = std::exp(rec_lw[i]);
            worst_weight = std::max(worst_weight, std::abs(wr - ws) / ws);
        }
    }

    // Push-forward identity: a fresh full solve must reproduce the stored
    // recursive segments bit-for-bit at every stage boundary.
    std::vector<double> per_member(prior.size(), 0.0);
    parallel_for(prior.size(), [&](std::size_t i) {
        auto init = model.prepare_initial(prior.members[i]);
        auto traj = model.segment(init, 0.0, ms.times.back(), snaps);
        double w = 0.0;
        for (std::size_t j = 0; j < fd.segments.size(); ++j) {
            const auto& seg_states = fd.segments[j].member_states[i];
            const auto& end_state = seg_states.back();
            const double t = fd.segments[j].times.back();
            std::size_t idx = traj.nearest(t);
            w = std::max(w, Model::distance(end_state, traj.states[idx]));
        }
        per_member[i] = w;
    });
    double worst_state = 0.0;
    for (double w : per_member) worst_state = std::max(worst_state, w);
    return {worst_weight, worst_state};
}

}  // namespace

RunRecord exp_equivalence(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "equivalence";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    // Navier-Stokes lane.
    double ns_weight_err = 0.0, ns_state_err = 0.0;
    {
        const int d = ns_obs_dim(cfg);
        const NoiseModel nm = build_noise(cfg, d);
        std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end,
                                                       observable_proto(cfg));
        NsModel model = make_ns_model(cfg, cfg.n_modes, cfg.viscosity);
        const std::vector<double> snaps =
            stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
        WeightedEnsemble<SpectralField> prior =
            sample_prior(cfg.prior, model.config().grid, cfg.n_members, cfg.seed);
        MeasurementSet ms = ns_measurements(cfg, model, windows, nm);
        std::tie(ns_weight_err, ns_state_err) =
            equivalence_errors(model, prior, windows, ms, nm, snaps);
    }

    // Burgers lane.
    double fv_weight_err = 0.0, fv_state_err = 0.0;
    {
        Observable proto = observable_proto(cfg);
        proto.map = PointwiseMap::component;  // scalar field observable
        std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end, proto);
        const NoiseModel nm = build_noise(cfg, 1);

        const double stage_len = cfg.t_end / static_cast<double>(cfg.n_stages);
        const double dx = two_pi / static_cast<double>(cfg.n_cells);
        const double umax = cfg.prior.support_radius + 0.5;
        const std::size_t group = cfg.snaps_per_stage + 1;
        std::size_t sps = static_cast<std::size_t>(
            std::ceil(stage_len / (cfg.fv_cfl * 0.5 * dx / umax)));
        sps = std::max(group, ((sps + group - 1) / group) * group);
        FVConfig fvcfg;
        fvcfg.n_cells = cfg.n_cells;
        fvcfg.dt = stage_len / static_cast<double>(sps);
        fvcfg.t_end = cfg.t_end;
        fvcfg.flux = flux_from_string(cfg.flux);
        BurgersModel model(fvcfg);
        const std::vector<double> snaps =
            stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
        WeightedEnsemble<CellField> prior =
            sample_prior_claw(cfg.prior, cfg.n_cells, cfg.n_members, cfg.seed);
        CellField truth = sample_prior_cells(cfg.prior, cfg.n_cells, cfg.seed,
                                             cfg.truth_member);
        FVTrajectory truth_traj = model.segment(truth, 0.0, cfg.t_end, snaps);
        MeasurementSet ms = synthesize_measurements(truth_traj, windows, nm, cfg.noise_seed,
                                                    "prior-draw", cfg.noise_scale);
        std::tie(fv_weight_err, fv_state_err) =
            equivalence_errors(model, prior, windows, ms, nm, snaps);
    }

    rec.criteria.push_back({"equivalence_ns_weights_1e-12", ns_weight_err <= 1e-12,
                            "max rel err = " + fmt(ns_weight_err)});
    rec.criteria.push_back({"equivalence_ns_pushforward_exact", ns_state_err == 0.0,
                            "max distance = " + fmt(ns_state_err)});
    rec.criteria.push_back({"equivalence_fv_weights_1e-12", fv_weight_err <= 1e-12,
                            "max rel err = " + fmt(fv_weight_err)});
    rec.criteria.push_back({"equivalence_fv_pushforward_exact", fv_state_err == 0.0,
                            "max distance = " + fmt(fv_state_err)});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// Noise audits.
// ---------------------------------------------------------------------------

RunRecord exp_noise_audit(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "noise-audit";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    const int d = static_cast<int>(cfg.gamma_diag.size());
    const std::vector<double> gamma = diagonal_matrix(cfg.gamma_diag);
    const NoiseModel gauss = NoiseModel::gaussian(gamma, d);
    const NoiseModel heavy = NoiseModel::heavy_tail(gamma, d, cfg.mixture_weight, cfg.kappa);
    const NoiseModel compact = NoiseModel::compact_fixture(gamma, d);

    const double radius = 6.0;
    const int resolution = 600;
    const NoiseAuditReport a_g = audit_noise(gauss, radius, resolution);
    const NoiseAuditReport a_h = audit_noise(heavy, radius, resolution);
    const NoiseAuditReport a_c = audit_noise(compact, radius, resolution);

    CsvWriter csv(cfg.out_dir + "/noise_audit.csv",
                  {"model", "L_rho", "sup_rho", "C_rho", "tail_min_ratio", "B_rho", "N1", "N2",
                   "N3"});
    auto emit = [&](const std::string& name, const NoiseAuditReport& a) {
        csv.row_mixed({name, fmt(a.lipschitz_estimate), fmt(a.sup_density), fmt(a.c_rho),
                       fmt(a.tail_min_ratio), fmt(a.b_rho), a.regularity_pass ? "1" : "0",
                       a.boundedness_pass ? "1" : "0", a.tail_pass ? "1" : "0"});
    };
    emit("gaussian", a_g);
    emit("gaussian_mixture", a_h);
    emit("compact_support", a_c);
    rec.artifacts.push_back("noise_audit.csv");

    rec.criteria.push_back({"noise_gaussian_passes_N1_N3", a_g.all_pass(), ""});
    rec.criteria.push_back({"noise_heavy_tail_passes_N1_N3", a_h.all_pass(), ""});
    rec.criteria.push_back({"noise_compact_fixture_fails_N3", !a_c.tail_pass, ""});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// Conservation-law suite.
// ---------------------------------------------------------------------------

namespace {

/// Position of the u = 1/2 downcrossing of a smeared shock front near x_hint.
double front_position(const CellField& u, double x_hint) {
    const std::size_t n = u.n_cells();
    const double dx = u.delta();
    double best = -1.0, best_dist = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = u[i], b = u[(i + 1) % n];
        if (a >= 0.5 && b < 0.5) {
            const double frac = (a - 0.5) / (a - b);
            double x = (static_cast<double>(i) + 0.5 + frac) * dx;
            const double dist = std::abs(x - x_hint);
            if (dist < best_dist) {
                best_dist = dist;
                best = x;
            }
        }
    }
    require(best >= 0.0, "front_position: no downcrossing found");
    return best;
}

}  // namespace

RunRecord exp_claw_suite(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "claw-suite";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;

    std::vector<double> sweep = cfg.n_cells_sweep.empty()
                                    ? std::vector<double>{64, 128, 256, 512}
                                    : cfg.n_cells_sweep;
    const FluxKind flux = flux_from_string(cfg.flux);

    // (a) Riemann shock: u = 1 on [pi/2, pi], 0 elsewhere; the 1 -> 0 jump at
    // x = pi travels at the Rankine-Hugoniot speed 1/2.
    CsvWriter shock_csv(cfg.out_dir + "/shock_front.csv",
                        {"n_cells", "front", "target", "error", "tolerance"});
    rec.artifacts.push_back("shock_front.csv");
    bool shock_ok = true;
    bool entropy_ok = true;
    double worst_entropy_jump = 0.0;
    for (double nc : sweep) {
        const std::size_t n_cells = static_cast<std::size_t>(nc);
        const double dx = two_pi / static_cast<double>(n_cells);
        FVConfig fvcfg;
        fvcfg.n_cells = n_cells;
        fvcfg.flux = flux;
        fvcfg.t_end = cfg.fv_t_end;
        const std::size_t steps =
            static_cast<std::size_t>(std::ceil(cfg.fv_t_end / (cfg.fv_cfl * dx)));
        fvcfg.dt = cfg.fv_t_end / static_cast<double>(steps);
        CellField u0 = sample_cells(n_cells, [](double x) {
            return (x > two_pi / 4.0 && x < two_pi / 2.0) ? 1.0 : 0.0;
        });
        FvSolver solver(fvcfg);
        double prev_entropy = entropy(u0);
        const double e0 = prev_entropy;
        CellField uT = solver.advance(u0, steps, 0, [&](std::size_t, const CellField& s) {
            const double e = entropy(s);
            worst_entropy_jump = std::max(worst_entropy_jump, e - prev_entropy);
            entropy_ok = entropy_ok && e <= prev_entropy + 1e-12 * std::max(1.0, e0);
            prev_entropy = e;
        });
        const double target = two_pi / 2.0 + 0.5 * cfg.fv_t_end;
        const double front = front_position(uT, target);
        shock_csv.row({static_cast<double>(n_cells), front, target,
                       std::abs(front - target), 2.0 * dx});
        shock_ok = shock_ok && std::abs(front - target) <= 2.0 * dx;
        save_cells_csv(uT, cfg.out_dir + "/shock_final_" + std::to_string(n_cells) + ".csv");
        rec.artifacts.push_back("shock_final_" + std::to_string(n_cells) + ".csv");
    }

    // (b) Weak BV sweep on smooth data through shock formation (s = 2).
    CsvWriter bv_csv(cfg.out_dir + "/weak_bv.csv", {"n_cells", "C_estimate"});
    rec.artifacts.push_back("weak_bv.csv");
    double bv_min = std::numeric_limits<double>::infinity(), bv_max = 0.0;
    for (double nc : sweep) {
        const std::size_t n_cells = static_cast<std::size_t>(nc);
        const double dx = two_pi / static_cast<double>(n_cells);
        FVConfig fvcfg;
        fvcfg.n_cells = n_cells;
        fvcfg.flux = flux;
        fvcfg.t_end = 2.0;
        const std::size_t steps =
            static_cast<std::size_t>(std::ceil(fvcfg.t_end / (cfg.fv_cfl * dx)));
        fvcfg.dt = fvcfg.t_end / static_cast<double>(steps);
        CellField u0 = sample_cells(n_cells, [](double x) { return std::sin(x); });
        // Snapshots dense in time for the BV quadrature.
        std::vector<double> snaps;
        for (int i = 1; i <= 32; ++i)
            snaps.push_back(fvcfg.t_end * i / 32.0);
        // Align to steps.
        for (double& t : snaps) t = std::round(t / fvcfg.dt) * fvcfg.dt;
        FvSolver solver(fvcfg);
        FVTrajectory traj = solver.solve(u0, snaps);
        PropertyReport bv = verify_weak_bv(traj, 2.0);
        bv_csv.row({static_cast<double>(n_cells), bv.lhs});
        bv_min = std::min(bv_min, bv.lhs);
        bv_max = std::max(bv_max, bv.lhs);
    }
    const bool bv_ok = bv_max <= 2.0 * bv_min;

    // (c) Filter stability mirror on the FV model plus structure curves.
    CsvWriter fit_csv(cfg.out_dir + "/claw_stability_fit.csv",
                      {"n_cells", "C_hat", "max_ratio"});
    rec.artifacts.push_back("claw_stability_fit.csv");
    CsvWriter sf_csv(cfg.out_dir + "/claw_structure.csv", {"Delta", "r", "S2T"});
    rec.artifacts.push_back("claw_structure.csv");
    {
        Observable proto = observable_proto(cfg);
        proto.map = PointwiseMap::component;
        const double t_filter = 0.5;
        const std::size_t n_stages = 2;
        std::vector<Observable> windows = tile_windows(n_stages, t_filter, proto);
        const NoiseModel nm = build_noise(cfg, 1);
        std::vector<double> bp;
        for (std::size_t j = 0; j <= n_stages; ++j)
            bp.push_back(t_filter * static_cast<double>(j) / n_stages);
        for (double nc : {64.0, 128.0, 256.0}) {
            const std::size_t n_cells = static_cast<std::size_t>(nc);
            const double dx = two_pi / static_cast<double>(n_cells);
            const double stage_len = t_filter / static_cast<double>(n_stages);
            const std::size_t group = cfg.snaps_per_stage + 1;
            std::size_t sps = static_cast<std::size_t>(
                std::ceil(stage_len / (cfg.fv_cfl * 0.5 * dx / (cfg.prior.support_radius + 0.5))));
            sps = std::max(group, ((sps + group - 1) / group) * group);
            FVConfig fvcfg;
            fvcfg.n_cells = n_cells;
            fvcfg.flux = flux;
            fvcfg.dt = stage_len / static_cast<double>(sps);
            fvcfg.t_end = t_filter;
            BurgersModel model(fvcfg);
            const std::vector<double> snaps =
                stage_snapshot_grid(bp, cfg.snaps_per_stage, model.dt());
            WeightedEnsemble<CellField> prior =
                sample_prior_claw(cfg.prior, n_cells, cfg.n_members, cfg.seed);
            CellField truth = sample_prior_cells(cfg.prior, n_cells, cfg.seed,
                                                 cfg.truth_member);
            FVTrajectory truth_traj = model.segment(truth, 0.0, t_filter, snaps);
            MeasurementSet ms = synthesize_measurements(truth_traj, windows, nm,
                                                        cfg.noise_seed, "prior-draw",
                                                        cfg.noise_scale);
            auto fd = filter_recursive(model, prior, windows, ms, nm, snaps);
            std::vector<double> xs, ys;
            for (std::size_t pi = 0; pi < cfg.perturbation_radii.size(); ++pi) {
                MeasurementSet ms_p = perturb_measurements(ms, nm, cfg.perturbation_radii[pi],
                                                           cfg.seed, pi);
                auto fd_p = filter_recursive(model, prior, windows, ms_p, nm, snaps);
                DTResult res = d_T(fd, fd_p,
                                   [](const CellField& a, const CellField& b) {
                                       return l2_distance(a, b);
                                   },
                                   cfg.quad_per_stage);
                xs.push_back(MeasurementSet::stacked_distance(ms, ms_p, nm));
                ys.push_back(res.d_t);
            }
            LipschitzFit fit = lipschitz_fit(xs, ys);
            fit_csv.row({static_cast<double>(n_cells), fit.slope, fit.max_ratio});

            for (double r : cfg.structure_radii) {
                double integral = 0.0;
                for (std::size_t j = 0; j < fd.segments.size(); ++j) {
                    const auto& seg = fd.segments[j];
                    const auto& lw = fd.stage_log_weights[j];
                    std::vector<double> vals(seg.times.size(), 0.0);
                    for (std::size_t i = 0; i < fd.n_members(); ++i) {
                        const double w = std::exp(lw[i]);
                        for (std::size_t s = 0; s < seg.times.size(); ++s) {
                            const double v = structure_s2(seg.member_states[i][s], r);
                            vals[s] += w * v * v;
                        }
                    }
                    for (std::size_t s = 0; s + 1 < seg.times.size(); ++s)
                        integral += 0.5 * (vals[s] + vals[s + 1]) *
                                    (seg.times[s + 1] - seg.times[s]);
                }
                sf_csv.row({dx, r, std::sqrt(integral)});
            }
        }
    }

    rec.criteria.push_back({"claw_shock_speed_2dx", shock_ok, ""});
    rec.criteria.push_back({"claw_weak_bv_bounded_2x", bv_ok,
                            "C in [" + fmt(bv_min) + ", " + fmt(bv_max) + "]"});
    rec.criteria.push_back({"claw_entropy_nonincreasing_1e-12", entropy_ok,
                            "worst jump = " + fmt(worst_entropy_jump)});
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

// ---------------------------------------------------------------------------
// simulate / filter entry points.
// ---------------------------------------------------------------------------

RunRecord run_simulate(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "simulate";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;
    if (cfg.model == "ns2d") {
        NsModel model = make_ns_model(cfg, cfg.n_modes, cfg.viscosity);
        const std::vector<double> snaps =
            stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
        SpectralField u0 = model.prepare_initial(ns_truth_field(cfg, model.config().grid));
        Trajectory traj = model.segment(u0, 0.0, cfg.t_end, snaps);
        save_trajectory(traj, cfg.out_dir + "/trajectory", cfg.viscosity, model.dt(),
                        cfg.t_end, "seed=" + std::to_string(cfg.seed) + ";truth=" + cfg.truth);
        save_field_json(traj.states.back(), cfg.out_dir + "/final_state.json");
        rec.artifacts.push_back("trajectory/manifest.json");
        rec.artifacts.push_back("final_state.json");
        PropertyReport energy = verify_energy(traj);
        rec.criteria.push_back({"simulate_energy_bound", energy.pass,
                                "max/initial = " + fmt(energy.lhs / std::max(energy.rhs, 1e-300))});
    } else {
        const double dx = two_pi / static_cast<double>(cfg.n_cells);
        FVConfig fvcfg;
        fvcfg.n_cells = cfg.n_cells;
        fvcfg.flux = flux_from_string(cfg.flux);
        fvcfg.t_end = cfg.fv_t_end;
        const std::size_t steps =
            static_cast<std::size_t>(std::ceil(cfg.fv_t_end / (cfg.fv_cfl * dx)));
        fvcfg.dt = cfg.fv_t_end / static_cast<double>(steps);
        CellField u0 = cfg.truth == "riemann"
                           ? sample_cells(cfg.n_cells,
                                          [](double x) {
                                              return (x > two_pi / 4.0 && x < two_pi / 2.0)
                                                         ? 1.0
                                                         : 0.0;
                                          })
                           : (cfg.truth == "sine"
                                  ? sample_cells(cfg.n_cells,
                                                 [](double x) { return std::sin(x); })
                                  : sample_prior_cells(cfg.prior, cfg.n_cells, cfg.seed,
                                                       cfg.truth_member));
        FvSolver solver(fvcfg);
        std::vector<double> snaps;
        for (int i = 1; i <= 16; ++i)
            snaps.push_back(std::round((fvcfg.t_end * i / 16.0) / fvcfg.dt) * fvcfg.dt);
        FVTrajectory traj = solver.solve(u0, snaps);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "cells_%04zu", i);
            save_cells_csv(traj.states[i], cfg.out_dir + "/" + name + std::string(".csv"));
            save_cells(traj.states[i], cfg.out_dir + "/" + name + std::string(".bin"));
        }
        nlohmann::ordered_json manifest;
        manifest["n_cells"] = cfg.n_cells;
        manifest["dt"] = fvcfg.dt;
        manifest["T"] = fvcfg.t_end;
        manifest["flux"] = cfg.flux;
        manifest["snapshot_times"] = traj.times;
        manifest["provenance"] = "seed=" + std::to_string(cfg.seed) + ";truth=" + cfg.truth;
        std::ofstream out(cfg.out_dir + "/manifest.json");
        out << manifest.dump(2) << "\n";
        rec.artifacts.push_back("manifest.json");
        PropertyReport l2 = verify_l2_bound(traj);
        rec.criteria.push_back({"simulate_l2_bound", l2.pass, ""});
    }
    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

namespace {

/// Systematic resampling (demo path only; excluded from equivalence tests).
template <class State>
WeightedEnsemble<State> systematic_resample(const WeightedEnsemble<State>& ens,
                                            std::uint64_t seed, std::uint64_t stage) {
    RngStream rng(seed, 0x5e5au + stage);
    const std::size_t n = ens.size();
    const double offset = rng.uniform() / static_cast<double>(n);
    std::vector<double> w = ens.weights();
    WeightedEnsemble<State> out;
    out.log_weights.assign(n, -std::log(static_cast<double>(n)));
    out.members.reserve(n);
    double cum = w[0];
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = offset + static_cast<double>(i) / static_cast<double>(n);
        while (cum < u && idx + 1 < n) cum += w[++idx];
        out.members.push_back(ens.members[idx]);
    }
    return out;
}

}  // namespace

RunRecord run_filter(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.experiment = "filter";
    rec.config_hash = cfg.hash();
    ensure_directory(cfg.out_dir);
    Stopwatch total;
    require(cfg.model == "ns2d", "filter: archive path implemented for ns2d");

    const int d = ns_obs_dim(cfg);
    const NoiseModel nm = build_noise(cfg, d);
    std::vector<Observable> windows = tile_windows(cfg.n_stages, cfg.t_end,
                                                   observable_proto(cfg));
    NsModel model = make_ns_model(cfg, cfg.n_modes, cfg.viscosity);
    const std::vector<double> snaps =
        stage_snapshot_grid(ns_breakpoints(cfg), cfg.snaps_per_stage, model.dt());
    WeightedEnsemble<SpectralField> prior =
        sample_prior(cfg.prior, model.config().grid, cfg.n_members, cfg.seed);
    MeasurementSet ms = ns_measurements(cfg, model, windows, nm);
    save_measurements(ms, cfg.out_dir + "/measurements.json");
    rec.artifacts.push_back("measurements.json");

    auto fd = filter_recursive(model, prior, windows, ms, nm, snaps);

    // Archive: manifest + per-segment ensemble archives.
    nlohmann::ordered_json manifest;
    manifest["breakpoints"] = fd.breakpoints;
    manifest["stage_log_weights"] = fd.stage_log_weights;
    manifest["ledger"] = {{"phi", fd.ledger.phi}, {"log_z", fd.ledger.log_z}};
    std::vector<std::string> seg_dirs;
    for (std::size_t j = 0; j < fd.segments.size(); ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "segment_%02zu", j);
        const std::string dir = cfg.out_dir + "/" + name;
        ensure_directory(dir);
        nlohmann::ordered_json seg_manifest;
        seg_manifest["times"] = fd.segments[j].times;
        seg_manifest["n_members"] = fd.n_members();
        for (std::size_t i = 0; i < fd.n_members(); ++i)
            for (std::size_t s = 0; s < fd.segments[j].times.size(); ++s) {
                char fname[48];
                std::snprintf(fname, sizeof(fname), "member_%03zu_snap_%03zu.bin", i, s);
                save_field(fd.segments[j].member_states[i][s], dir + "/" + fname);
            }
        std::ofstream seg_out(dir + "/manifest.json");
        seg_out << seg_manifest.dump(2) << "\n";
        seg_dirs.push_back(name);
    }
    manifest["segments"] = seg_dirs;
    std::ofstream out(cfg.out_dir + "/filtering_manifest.json");
    out << manifest.dump(2) << "\n";
    rec.artifacts.push_back("filtering_manifest.json");

    // Diagnostics: ESS per stage, density-bound certificates.
    {
        CsvWriter csv(cfg.out_dir + "/ess.csv", {"stage", "ess"});
        for (std::size_t j = 0; j < fd.stage_log_weights.size(); ++j) {
            WeightedEnsemble<SpectralField> tmp;
            tmp.members = prior.members;
            tmp.log_weights = fd.stage_log_weights[j];
            csv.row({static_cast<double>(j), ess(tmp)});
        }
        rec.artifacts.push_back("ess.csv");
    }
    const NoiseAuditReport audit = audit_noise(nm, 6.0, 600);
    DensityBoundReport bounds = posterior_density_bounds(fd, ms, nm, audit);
    {
        CsvWriter csv(cfg.out_dir + "/density_bounds.csv",
                      {"stage", "log_z", "log_z_lower", "slack_z", "max_weight_ratio",
                       "log_ratio_upper", "slack_ratio"});
        for (std::size_t k = 0; k < bounds.stages.size(); ++k) {
            const auto& st = bounds.stages[k];
            csv.row({static_cast<double>(k + 1), st.log_z, st.log_z_lower, st.slack_z,
                     st.max_weight_ratio, st.log_ratio_upper, st.slack_ratio});
        }
        rec.artifacts.push_back("density_bounds.csv");
    }
    rec.criteria.push_back({"filter_density_bounds", bounds.all_pass(), ""});

    if (cfg.resample) {
        WeightedEnsemble<SpectralField> tmp;
        tmp.members = prior.members;
        tmp.log_weights = fd.stage_log_weights.back();
        auto resampled = systematic_resample(tmp, cfg.seed, cfg.n_stages);
        save_ensemble(resampled, cfg.prior, cfg.seed, cfg.out_dir + "/resampled_posterior");
        rec.artifacts.push_back("resampled_posterior/manifest.json");
    }

    rec.timings_sec.push_back({"total", total.seconds()});
    write_run_record(rec, cfg.out_dir);
    return rec;
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "stability") return exp_stability(cfg);
    if (cfg.experiment == "consistency") return exp_consistency(cfg);
    if (cfg.experiment == "compactness") return exp_compactness(cfg);
    if (cfg.experiment == "equivalence") return exp_equivalence(cfg);
    if (cfg.experiment == "noise-audit") return exp_noise_audit(cfg);
    if (cfg.experiment == "claw-suite") return exp_claw_suite(cfg);
    if (cfg.experiment == "simulate") return run_simulate(cfg);
    if (cfg.experiment == "filter") return run_filter(cfg);
    throw ConfigError("unknown experiment: " + cfg.experiment);
}

void write_run_record(const RunRecord& rec, const std::string& out_dir) {
    ensure_directory(out_dir);
    nlohmann::ordered_json j;
    j["experiment"] = rec.experiment;
    j["config_hash"] = rec.config_hash;
    j["artifacts"] = rec.artifacts;
    nlohmann::ordered_json crits = nlohmann::ordered_json::array();
    for (const auto& c : rec.criteria)
        crits.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    j["criteria"] = crits;
    j["all_pass"] = rec.all_pass();
    std::ofstream out(out_dir + "/run_record.json");
    out << j.dump(2) << "\n";

    nlohmann::ordered_json t;
    for (const auto& [name, sec] : rec.timings_sec) t[name] = sec;
    std::ofstream tout(out_dir + "/timings.json");
    tout << t.dump(2) << "\n";
}

}  // namespace dalab
