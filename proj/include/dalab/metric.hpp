#pragma once

#include <vector>

#include "dalab/ensemble.hpp"
#include "dalab/filter.hpp"
#include "dalab/parallel.hpp"
#include "dalab/transport.hpp"

namespace dalab {

struct W1Result {
    double value = 0.0;
    TransportPlan plan;
};

/// Dense pairwise cost matrix c_ij = dist(u_i, v_j); rows fill in parallel.
template <class State, class Dist>
std::vector<double> cost_matrix(const std::vector<const State*>& us,
                                const std::vector<const State*>& vs, Dist&& dist) {
    std::vector<double> c(us.size() * vs.size());
    parallel_for(us.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < vs.size(); ++j)
            c[i * vs.size() + j] = dist(*us[i], *vs[j]);
    });
    return c;
}

/// Exact W1 between weighted ensembles (p = 1: costs are plain distances).
template <class State, class Dist>
W1Result w1(const WeightedEnsemble<State>& A, const WeightedEnsemble<State>& B, Dist&& dist) {
    A.validate();
    B.validate();
    require(A.is_normalized(1e-9) && B.is_normalized(1e-9),
            "w1: ensembles must be normalized");
    std::vector<const State*> us(A.size()), vs(B.size());
    for (std::size_t i = 0; i < A.size(); ++i) us[i] = &A.members[i];
    for (std::size_t j = 0; j < B.size(); ++j) vs[j] = &B.members[j];
    const std::vector<double> c = cost_matrix(us, vs, dist);
    W1Result r;
    r.plan = solve_transport(c, A.weights(), B.weights());
    r.value = r.plan.cost;
    return r;
}

/// Kantorovich dual lower bound from the 1-Lipschitz probe family
/// u -> ||u - anchor||; guaranteed <= the primal optimum, tight on Diracs.
template <class State, class Dist>
double kantorovich_lower_bound(const WeightedEnsemble<State>& A, const WeightedEnsemble<State>& B,
                               const std::vector<const State*>& anchors, Dist&& dist) {
    double best = 0.0;
    for (const State* a : anchors) {
        double da = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i) da += A.weight(i) * dist(A.members[i], *a);
        double db = 0.0;
        for (std::size_t j = 0; j < B.size(); ++j) db += B.weight(j) * dist(B.members[j], *a);
        best = std::max(best, std::abs(da - db));
    }
    return best;
}

struct DTResult {
    double d_t = 0.0;          // int_0^T W1 dt (trapezoid per stage)
    double sup_w1 = 0.0;       // max over evaluated nodes, including t = T
    std::vector<double> times;
    std::vector<double> w1_values;
    std::size_t max_plan_augmentations = 0;
    double max_marginal_residual = 0.0;
};

namespace detail {

template <class State>
std::pair<std::vector<const State*>, std::vector<double>> ensemble_view(
    const FilteringDistribution<State>& fd, double t, bool final_weights) {
    auto [members, lw] = fd.at_time(t);
    std::vector<double> w(lw->size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp((*lw)[i]);
    if (final_weights) {
        const auto& last = fd.stage_log_weights.back();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(last[i]);
    }
    return {std::move(members), std::move(w)};
}

}  // namespace detail

/// Time-integrated W1 between two filtering distributions sharing break-
/// points and snapshot grids. Quadrature nodes: stage boundaries plus
/// `per_stage` interior nodes; the integrand is piecewise smooth with kinks
/// at the breakpoints, so each stage integrates separately. Also reports
/// sup_t W1 including the post-correction ensemble at t = T. Per-node
/// transport problems solve in parallel.
template <class State, class Dist>
DTResult d_T(const FilteringDistribution<State>& F, const FilteringDistribution<State>& G,
             Dist&& dist, std::size_t per_stage = 16) {
    require(F.breakpoints.size() == G.breakpoints.size(), "d_T: breakpoint count mismatch");
    for (std::size_t i = 0; i < F.breakpoints.size(); ++i)
        require(std::abs(F.breakpoints[i] - G.breakpoints[i]) <= 1e-9,
                "d_T: mismatched horizons");
    require(F.segments.size() == G.segments.size(), "d_T: segment count mismatch");
    for (std::size_t j = 0; j < F.segments.size(); ++j) {
        require(F.segments[j].times.size() == G.segments[j].times.size(),
                "d_T: snapshot grids differ");
        for (std::size_t s = 0; s < F.segments[j].times.size(); ++s)
            require(std::abs(F.segments[j].times[s] - G.segments[j].times[s]) <= 1e-9,
                    "d_T: snapshot grids differ");
    }

    struct Node {
        double t;
        std::size_t stage;   // weights of this stage apply
        bool stage_end;      // true when t closes the stage interval
    };
    std::vector<Node> nodes;
    for (std::size_t j = 0; j + 1 < F.breakpoints.size(); ++j) {
        const auto& seg = F.segments[j];
        // Use stored snapshot times: boundaries plus ~per_stage interior.
        std::vector<double> interior(seg.times.begin() + 1, seg.times.end() - 1);
        std::vector<double> picks;
        picks.push_back(seg.times.front());
        if (!interior.empty()) {
            const std::size_t count = std::min<std::size_t>(per_stage, interior.size());
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = (i * interior.size()) / count;
                picks.push_back(interior[idx]);
            }
        }
        picks.push_back(seg.times.back());
        for (std::size_t i = 0; i < picks.size(); ++i)
            nodes.push_back({picks[i], j, i + 1 == picks.size()});
    }

    std::vector<double> values(nodes.size());
    std::vector<std::size_t> augs(nodes.size());
    std::vector<double> resid(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) {
        const Node& nd = nodes[k];
        auto [fu, fw] = detail::ensemble_view(F, nd.t, false);
        auto [gu, gw] = detail::ensemble_view(G, nd.t, false);
        // Within a stage the active weights are the stage's even at the
        // closing boundary (right-continuity kicks in only past it).
        const auto& flw = F.stage_log_weights[nd.stage];
        const auto& glw = G.stage_log_weights[nd.stage];
        for (std::size_t i = 0; i < fw.size(); ++i) fw[i] = std::exp(flw[i]);
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] = std::exp(glw[i]);
        const std::vector<double> c = cost_matrix(fu, gu, dist);
        TransportPlan plan = solve_transport(c, fw, gw);
        values[k] = plan.cost;
        augs[k] = plan.augmentations;
        resid[k] = plan.max_marginal_residual;
    });

    DTResult out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        out.times.push_back(nodes[k].t);
        out.w1_values.push_back(values[k]);
        out.sup_w1 = std::max(out.sup_w1, values[k]);
        out.max_plan_augmentations = std::max(out.max_plan_augmentations, augs[k]);
        out.max_marginal_residual = std::max(out.max_marginal_residual, resid[k]);
        if (k + 1 < nodes.size() && nodes[k + 1].stage == nodes[k].stage)
            out.d_t += 0.5 * (values[k] + values[k + 1]) * (nodes[k + 1].t - nodes[k].t);
    }

    // Post-correction ensembles at t = T (the [t_N, inf) piece of the
    // filtering distribution; contributes to sup_t only).
    {
        const double T = F.breakpoints.back();
        auto [fu, fw] = detail::ensemble_view(F, T, true);
        auto [gu, gw] = detail::ensemble_view(G, T, true);
        const std::vector<double> c = cost_matrix(fu, gu, dist);
        TransportPlan plan = solve_transport(c, fw, gw);
        out.sup_w1 = std::max(out.sup_w1, plan.cost);
    }
    return out;
}

/// Least-squares slope through the origin plus the max pointwise ratio;
/// estimates the constant of a conjectured bound y <= C x.
struct LipschitzFit {
    double slope = 0.0;
    double max_ratio = 0.0;
};

inline LipschitzFit lipschitz_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(!xs.empty() && xs.size() == ys.size(), "lipschitz_fit: empty or mismatched input");
    double sxy = 0.0, sxx = 0.0;
    LipschitzFit f;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(xs[i] > 0.0, "lipschitz_fit: xs must be positive");
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
        f.max_ratio = std::max(f.max_ratio, ys[i] / xs[i]);
    }
    f.slope = sxy / sxx;
    return f;
}

}  // namespace dalab
