#pragma once

#include <string>
#include <vector>

#include "dalab/noise.hpp"
#include "dalab/observable.hpp"

namespace dalab {

/// Noisy window measurements y_j = G_j(traj) + eta_j with provenance.
struct MeasurementSet {
    std::vector<double> times;               // t_1 < ... < t_N
    std::vector<std::vector<double>> values; // y_j in R^d
    std::vector<double> gamma;               // dense row-major d x d
    std::string noise_kind;
    double mixture_weight = 0.0;
    double kappa = 0.0;
    std::uint64_t seed = 0;
    std::string truth_id;

    int dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }

    void validate() const {
        require(times.size() == values.size(), "MeasurementSet: times/values mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            require(times[i] > times[i - 1], "MeasurementSet: times must increase");
        for (const auto& v : values)
            require(v.size() == values[0].size(), "MeasurementSet: ragged values");
    }

    /// |y|_Gamma over the whole stack: sqrt(sum_j |y_j|_Gamma^2).
    double stacked_gamma_norm(const NoiseModel& nm) const {
        double s = 0.0;
        for (const auto& v : values) {
            const double q = nm.gamma_norm(v);
            s += q * q;
        }
        return std::sqrt(s);
    }

    static double stacked_distance(const MeasurementSet& a, const MeasurementSet& b,
                                   const NoiseModel& nm);
};

/// y_j = G_j(truth trajectory) + eta_j, noise streams keyed by (seed, j).
template <class Traj>
MeasurementSet synthesize_measurements(const Traj& truth, const std::vector<Observable>& obs,
                                       const NoiseModel& nm, std::uint64_t seed,
                                       const std::string& truth_id,
                                       double noise_scale = 1.0) {
    MeasurementSet ms;
    ms.gamma = nm.gamma();
    ms.noise_kind = nm.kind_name();
    ms.mixture_weight = nm.mixture_weight();
    ms.kappa = nm.kappa();
    ms.seed = seed;
    ms.truth_id = truth_id;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        std::vector<double> y = evaluate(obs[j], truth);
        require(static_cast<int>(y.size()) == nm.dim(),
                "synthesize_measurements: observable dimension does not match Gamma");
        RngStream rng(seed, 0x9e55u + j);
        std::vector<double> eta = nm.sample(rng);
        for (std::size_t c = 0; c < y.size(); ++c) y[c] += noise_scale * eta[c];
        ms.times.push_back(obs[j].t_end);
        ms.values.push_back(std::move(y));
    }
    ms.validate();
    return ms;
}

void save_measurements(const MeasurementSet& ms, const std::string& path);
MeasurementSet load_measurements(const std::string& path);

}  // namespace dalab
