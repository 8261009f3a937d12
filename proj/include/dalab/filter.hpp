#pragma once

#include <functional>
#include <vector>

#include "dalab/likelihood.hpp"

namespace dalab {

/// Piecewise-in-time family of weighted ensembles realizing the filtering
/// distribution: on [t_j, t_{j+1}) the weights incorporate exactly the first
/// j measurements (right-continuous at breakpoints); member identity is
/// preserved across stages.
template <class State>
struct FilteringDistribution {
    std::vector<double> breakpoints;  // t_0 = 0 < t_1 < ... < t_N

    struct Segment {
        std::vector<double> times;                    // [t_j .. t_{j+1}], step-aligned
        std::vector<std::vector<State>> member_states;  // [member][time index]
    };
    std::vector<Segment> segments;                  // one per stage interval
    std::vector<std::vector<double>> stage_log_weights;  // N+1 entries; [j] active on [t_j,t_{j+1})
    LikelihoodLedger ledger;

    std::size_t n_stages() const { return segments.size(); }
    std::size_t n_members() const {
        return segments.empty() ? 0 : segments[0].member_states.size();
    }

    /// Stage index whose weights are active at time t (right-continuous).
    std::size_t stage_at(double t) const {
        require(t >= breakpoints.front() - 1e-9 && t <= breakpoints.back() + 1e-9,
                "FilteringDistribution: time outside [0,T]");
        for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j)
            if (t < breakpoints[j + 1] - 1e-12) return j;
        return breakpoints.size() - 1;  // t == T: all measurements active
    }

    /// Members (nearest stored snapshot) and active log-weights at time t.
    std::pair<std::vector<const State*>, const std::vector<double>*> at_time(double t) const {
        const std::size_t j = stage_at(t);
        const Segment& seg = segments[std::min(j, segments.size() - 1)];
        std::size_t idx = 0;
        double best = std::abs(seg.times[0] - t);
        for (std::size_t s = 1; s < seg.times.size(); ++s) {
            const double d = std::abs(seg.times[s] - t);
            if (d < best) {
                best = d;
                idx = s;
            }
        }
        std::vector<const State*> members(seg.member_states.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            members[i] = &seg.member_states[i][idx];
        return {std::move(members), &stage_log_weights[j]};
    }
};

/// Stage-aligned snapshot grid: breakpoints plus `per_stage` uniform interior
/// nodes per stage, every node a multiple of dt.
inline std::vector<double> stage_snapshot_grid(const std::vector<double>& breakpoints,
                                               std::size_t per_stage, double dt) {
    std::vector<double> out;
    std::size_t last = static_cast<std::size_t>(-1);
    auto push_step = [&](std::size_t s) {
        if (out.empty() || s != last) {
            out.push_back(static_cast<double>(s) * dt);
            last = s;
        }
    };
    for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
        const std::size_t s0 = time_to_step(breakpoints[j], dt);
        const std::size_t s1 = time_to_step(breakpoints[j + 1], dt);
        require(s1 > s0, "stage_snapshot_grid: empty stage");
        push_step(s0);
        for (std::size_t i = 1; i <= per_stage; ++i) {
            const std::size_t s = s0 + (s1 - s0) * i / (per_stage + 1);
            if (s > s0 && s < s1) push_step(s);
        }
        push_step(s1);
    }
    return out;
}

/// Recursive prediction-correction filter: the initial segment pushes the
/// prior forward; at each t_j the weights are multiplied by exp(-Phi_j) and
/// renormalized, then the members are propagated to t_{j+1}. With stage
/// boundaries on step boundaries this reproduces the one-shot smoothing
/// weights exactly (the solver restart is bit-exact).
template <class Model>
FilteringDistribution<typename Model::State> filter_recursive(
    const Model& model, const WeightedEnsemble<typename Model::State>& prior,
    const std::vector<Observable>& observables, const MeasurementSet& ms, const NoiseModel& nm,
    const std::vector<double>& snapshot_times) {
    using State = typename Model::State;
    prior.validate();
    ms.validate();
    require(observables.size() == ms.values.size(),
            "filter_recursive: one observable window per measurement");
    for (std::size_t j = 0; j < observables.size(); ++j)
        require(std::abs(observables[j].t_end - ms.times[j]) <= 1e-9,
                "filter_recursive: window ends must align with measurement times");

    FilteringDistribution<State> fd;
    fd.breakpoints.push_back(0.0);
    for (double t : ms.times) fd.breakpoints.push_back(t);

    const std::size_t n = prior.size();
    const std::size_t n_stages = ms.values.size();
    fd.ledger.phi.assign(n_stages, std::vector<double>(n, 0.0));
    fd.ledger.l_vals.assign(n_stages, std::vector<std::vector<double>>(n));

    // Stage 0 weights are the prior's, normalized.
    WeightedEnsemble<State> current = prior;
    current.normalize();
    fd.stage_log_weights.push_back(current.log_weights);

    std::vector<State> states(n);
    parallel_for(n, [&](std::size_t i) { states[i] = model.prepare_initial(prior.members[i]); });

    for (std::size_t j = 0; j < n_stages; ++j) {
        const double t0 = fd.breakpoints[j], t1 = fd.breakpoints[j + 1];
        std::vector<double> seg_snaps;
        for (double t : snapshot_times)
            if (t >= t0 - 1e-9 && t <= t1 + 1e-9) seg_snaps.push_back(t);

        typename FilteringDistribution<State>::Segment seg;
        seg.member_states.resize(n);
        std::vector<std::vector<double>> phis(n);
        std::vector<std::vector<double>> lvals(n);
        std::vector<std::vector<double>> seg_times(n);
        parallel_for(n, [&](std::size_t i) {
            auto traj = model.segment(states[i], t0, t1, seg_snaps);
            std::vector<double> lv = model.observe(observables[j], traj);
            phis[i] = {log_likelihood(nm, lv, ms.values[j])};
            lvals[i] = std::move(lv);
            states[i] = traj.states.back();
            seg_times[i] = traj.times;
            seg.member_states[i] = std::move(traj.states);
        });
        seg.times = seg_times[0];
        fd.segments.push_back(std::move(seg));

        for (std::size_t i = 0; i < n; ++i) {
            fd.ledger.phi[j][i] = phis[i][0];
            fd.ledger.l_vals[j][i] = lvals[i];
            current.log_weights[i] -= phis[i][0];
        }
        current.normalize();
        fd.stage_log_weights.push_back(current.log_weights);
    }
    fd.ledger.recompute_normalizers(n);
    return fd;
}

/// S_{t,#} mu_prior as a single-segment filtering distribution on [0, T]
/// (the no-measurement case nu^0_t).
template <class Model>
FilteringDistribution<typename Model::State> prior_pushforward(
    const Model& model, const WeightedEnsemble<typename Model::State>& prior, double t_end,
    const std::vector<double>& snapshot_times) {
    using State = typename Model::State;
    prior.validate();
    FilteringDistribution<State> fd;
    fd.breakpoints = {0.0, t_end};
    WeightedEnsemble<State> current = prior;
    current.normalize();
    fd.stage_log_weights.push_back(current.log_weights);
    fd.stage_log_weights.push_back(current.log_weights);

    typename FilteringDistribution<State>::Segment seg;
    seg.member_states.resize(prior.size());
    std::vector<std::vector<double>> seg_times(prior.size());
    parallel_for(prior.size(), [&](std::size_t i) {
        auto init = model.prepare_initial(prior.members[i]);
        auto traj = model.segment(init, 0.0, t_end, snapshot_times);
        seg_times[i] = traj.times;
        seg.member_states[i] = std::move(traj.states);
    });
    seg.times = seg_times[0];
    fd.segments.push_back(std::move(seg));
    return fd;
}

/// Weighted mean of a functional over the active segment at time t
/// (nearest stored snapshot, no temporal interpolation).
template <class State, class Fn>
double expectation(const FilteringDistribution<State>& fd, double t, Fn&& functional) {
    auto [members, log_w] = fd.at_time(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        acc += std::exp((*log_w)[i]) * functional(*members[i]);
    return acc;
}

/// Certificate report for the normalizer lower bound and weight-ratio upper
/// bound, with constants assembled from the noise audit and the ledger.
struct DensityBoundReport {
    struct Stage {
        double log_z = 0.0;
        double log_z_lower = 0.0;     // -k B_rho - |y_{1:k}|^2 - sum ||L_j||^2
        double slack_z = 0.0;         // log_z - lower
        double max_weight_ratio = 0.0;  // max_i n w_i at stage k
        double log_ratio_upper = 0.0;   // k (B_rho + C_rho) + |y|^2 + sum ||L||^2
        double slack_ratio = 0.0;
        bool pass = false;
    };
    std::vector<Stage> stages;
    bool all_pass() const {
        for (const auto& s : stages)
            if (!s.pass) return false;
        return !stages.empty();
    }
};

template <class State>
DensityBoundReport posterior_density_bounds(const FilteringDistribution<State>& fd,
                                            const MeasurementSet& ms, const NoiseModel& nm,
                                            const NoiseAuditReport& audit) {
    DensityBoundReport rep;
    const std::size_t n = fd.n_members();
    double y2 = 0.0;
    double l2sum = 0.0;
    for (std::size_t k = 0; k < fd.ledger.n_stages(); ++k) {
        const double qy = nm.gamma_norm(ms.values[k]);
        y2 += qy * qy;
        // ||L_k||^2_{L2(mu_prior)} against uniform prior weights.
        double lk = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ql = nm.gamma_norm(fd.ledger.l_vals[k][i]);
            lk += ql * ql;
        }
        l2sum += lk / static_cast<double>(n);

        DensityBoundReport::Stage st;
        st.log_z = fd.ledger.log_z[k];
        st.log_z_lower = -static_cast<double>(k + 1) * audit.b_rho - y2 - l2sum;
        st.slack_z = st.log_z - st.log_z_lower;
        double wmax = -std::numeric_limits<double>::infinity();
        for (double lw : fd.stage_log_weights[k + 1]) wmax = std::max(wmax, lw);
        st.max_weight_ratio = std::exp(wmax) * static_cast<double>(n);
        st.log_ratio_upper =
            static_cast<double>(k + 1) * (audit.b_rho + audit.c_rho) + y2 + l2sum;
        st.slack_ratio = st.log_ratio_upper - std::log(st.max_weight_ratio);
        st.pass = st.slack_z >= 0.0 && st.slack_ratio >= 0.0;
        rep.stages.push_back(st);
    }
    return rep;
}

}  // namespace dalab
