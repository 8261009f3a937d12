#pragma once

#include <cmath>
#include <vector>

#include "dalab/common.hpp"
#include "dalab/parallel.hpp"

namespace dalab {

/// Particles plus normalized log-weights approximating a probability measure
/// on state space. Weights live in log space throughout; Z can be
/// exponentially small and linear-space weights would underflow.
template <class State>
struct WeightedEnsemble {
    std::vector<State> members;
    std::vector<double> log_weights;

    std::size_t size() const { return members.size(); }

    void validate() const {
        require(!members.empty(), "WeightedEnsemble: needs at least one member");
        require(members.size() == log_weights.size(),
                "WeightedEnsemble: weight/member length mismatch");
    }

    double weight(std::size_t i) const { return std::exp(log_weights[i]); }

    std::vector<double> weights() const {
        std::vector<double> w(log_weights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
        return w;
    }

    /// Shift log-weights by log-sum-exp so the weights sum to one. Weight
    /// ratios are preserved exactly; idempotent.
    void normalize() {
        validate();
        const double lse = log_sum_exp(log_weights);
        if (!std::isfinite(lse))
            throw DegeneratePosteriorError(
                "normalize: all weights vanished; measurement incompatible with every member");
        for (double& lw : log_weights) lw -= lse;
    }

    bool is_normalized(double tol = 1e-12) const {
        double s = 0.0;
        for (double lw : log_weights) s += std::exp(lw);
        return std::abs(s - 1.0) <= tol;
    }

    static WeightedEnsemble uniform(std::vector<State> ms) {
        WeightedEnsemble e;
        e.log_weights.assign(ms.size(), -std::log(static_cast<double>(ms.size())));
        e.members = std::move(ms);
        return e;
    }
};

/// 1 / sum w_i^2, in [1, n]; the usual weight-degeneracy diagnostic.
template <class State>
double ess(const WeightedEnsemble<State>& ens) {
    double lse = log_sum_exp(ens.log_weights);
    if (!std::isfinite(lse)) throw DegeneratePosteriorError("ess: degenerate weights");
    double s2 = 0.0;
    for (double lw : ens.log_weights) {
        const double w = std::exp(lw - lse);
        s2 += w * w;
    }
    return 1.0 / s2;
}

/// (sum_i w_i ||u_i||^p)^{1/p} for p in {1,2}; norm_fn supplies the state norm.
template <class State, class NormFn>
double moment(const WeightedEnsemble<State>& ens, int p, NormFn&& norm_fn) {
    require(p == 1 || p == 2, "moment: p must be 1 or 2");
    ens.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const double nv = norm_fn(ens.members[i]);
        acc += ens.weight(i) * (p == 1 ? nv : nv * nv);
    }
    return p == 1 ? acc : std::sqrt(acc);
}

/// Push-forward under a map: members replaced by fw(member), weights left
/// untouched (the image measure keeps its mass). Members propagate in
/// parallel, keyed by index, so the result is scheduling-independent.
template <class State, class Fw>
WeightedEnsemble<State> pushforward(const WeightedEnsemble<State>& ens, Fw&& fw) {
    ens.validate();
    WeightedEnsemble<State> out;
    out.log_weights = ens.log_weights;
    out.members.resize(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) { out.members[i] = fw(ens.members[i], i); });
    return out;
}

}  // namespace dalab
