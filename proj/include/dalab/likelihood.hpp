#pragma once

#include <vector>

#include "dalab/ensemble.hpp"
#include "dalab/measurement.hpp"
#include "dalab/noise.hpp"

namespace dalab {

/// Phi = -log rho(y - L); finite whenever rho is strictly positive. The
/// additive normalization constant is kept so ledger entries satisfy the
/// noise-model bounds verbatim; it cancels in the weights.
inline double log_likelihood(const NoiseModel& nm, const std::vector<double>& l_val,
                             const std::vector<double>& y) {
    require(l_val.size() == y.size(), "log_likelihood: dimension mismatch");
    std::vector<double> misfit(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) misfit[i] = y[i] - l_val[i];
    return -nm.log_density(misfit);
}

/// Per-member, per-stage likelihood bookkeeping: Phi values, the observable
/// values they came from, and running log-normalizers log Z_k.
struct LikelihoodLedger {
    std::vector<std::vector<double>> phi;                   // [stage][member]
    std::vector<std::vector<std::vector<double>>> l_vals;   // [stage][member][dim]
    std::vector<double> log_z;                              // cumulative, [stage]

    std::size_t n_stages() const { return phi.size(); }

    /// log Z_k for uniform prior weights, accumulated from the Phi table.
    void recompute_normalizers(std::size_t n_members) {
        log_z.assign(phi.size(), 0.0);
        std::vector<double> acc(n_members, -std::log(static_cast<double>(n_members)));
        for (std::size_t j = 0; j < phi.size(); ++j) {
            for (std::size_t i = 0; i < n_members; ++i) acc[i] -= phi[j][i];
            log_z[j] = log_sum_exp(acc);
        }
    }
};

/// One-shot smoothing posterior over the initial data: weights proportional
/// to exp(-sum_{j<=k} Phi_j(u_i)), members untouched.
template <class Model>
WeightedEnsemble<typename Model::State> smoothing_posterior(
    const Model& model, const WeightedEnsemble<typename Model::State>& prior,
    const std::vector<Observable>& observables, const MeasurementSet& ms, std::size_t k,
    const NoiseModel& nm, const std::vector<double>& stage_snapshot_times,
    LikelihoodLedger* ledger = nullptr) {
    prior.validate();
    require(k <= ms.values.size(), "smoothing_posterior: k exceeds measurement count");
    require(observables.size() >= ms.values.size(),
            "smoothing_posterior: observables do not cover the measurements");
    for (std::size_t i = 0; i < prior.size(); ++i)
        require(std::abs(prior.log_weights[i] - prior.log_weights[0]) < 1e-12,
                "smoothing_posterior: prior weights must be uniform");

    WeightedEnsemble<typename Model::State> out = prior;
    if (ledger) {
        ledger->phi.assign(k, std::vector<double>(prior.size(), 0.0));
        ledger->l_vals.assign(k, std::vector<std::vector<double>>(prior.size()));
    }
    if (k == 0) {
        out.normalize();
        return out;
    }

    const double t_k = ms.times[k - 1];
    std::vector<double> local_snaps;
    for (double t : stage_snapshot_times)
        if (t <= t_k + 1e-9) local_snaps.push_back(t);
    std::vector<std::vector<double>> phi_rows(prior.size());
    std::vector<std::vector<std::vector<double>>> l_rows(prior.size());
    parallel_for(prior.size(), [&](std::size_t i) {
        auto init = model.prepare_initial(prior.members[i]);
        auto traj = model.segment(init, 0.0, t_k, local_snaps);
        phi_rows[i].resize(k);
        l_rows[i].resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> lv = model.observe(observables[j], traj);
            phi_rows[i][j] = log_likelihood(nm, lv, ms.values[j]);
            l_rows[i][j] = std::move(lv);
        }
    });
    for (std::size_t i = 0; i < prior.size(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            out.log_weights[i] -= phi_rows[i][j];
            if (ledger) {
                ledger->phi[j][i] = phi_rows[i][j];
                ledger->l_vals[j][i] = l_rows[i][j];
            }
        }
    if (ledger) ledger->recompute_normalizers(prior.size());
    out.normalize();
    return out;
}

}  // namespace dalab
