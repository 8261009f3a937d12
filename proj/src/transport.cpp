#include "dalab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dalab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Mass below this is treated as exhausted; keeps augmentations from chasing
// subtraction dust without measurably disturbing the marginals.
constexpr double kMassEps = 1e-15;
}  // namespace

TransportPlan solve_transport(const std::vector<double>& cost, const std::vector<double>& a,
                              const std::vector<double>& b) {
    const std::size_t n = a.size(), m = b.size();
    require(n >= 1 && m >= 1, "solve_transport: empty marginals");
    require(cost.size() == n * m, "solve_transport: cost matrix size mismatch");
    double sa = 0.0, sb = 0.0;
    for (double v : a) {
        require(v >= 0.0, "solve_transport: negative mass");
        sa += v;
    }
    for (double v : b) {
        require(v >= 0.0, "solve_transport: negative mass");
        sb += v;
    }
    require(std::abs(sa - 1.0) <= 1e-9 && std::abs(sb - 1.0) <= 1e-9,
            "solve_transport: marginals must be normalized");

    TransportPlan plan;
    plan.n = n;
    plan.m = m;
    plan.flow.assign(n * m, 0.0);

    const std::size_t nv = n + m;  // sources: [0,n), sinks: [n, n+m)
    std::vector<double> ra(a), rb(b);
    std::vector<double> pot(nv, 0.0);
    std::vector<double> dist(nv);
    std::vector<int> parent(nv);
    std::vector<char> done(nv);

    const std::size_t max_aug = 8 * nv + 64;
    while (true) {
        double remaining = 0.0;
        for (double v : ra) remaining += v;
        if (remaining <= 1e-12) break;
        if (plan.augmentations > max_aug)
            throw std::runtime_error("solve_transport: augmentation budget exceeded");

        // Dense multi-source Dijkstra over the residual graph with reduced
        // costs c_ij + pot_u - pot_v (clamped at 0 against FP drift).
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (ra[i] > kMassEps) dist[i] = 0.0;

        std::size_t target = nv;
        while (true) {
            std::size_t u = nv;
            double best = kInf;
            for (std::size_t v = 0; v < nv; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u == nv) break;
            done[u] = 1;
            if (u >= n && rb[u - n] > kMassEps) {
                target = u;
                break;
            }
            if (u < n) {
                const double* crow = cost.data() + u * m;
                for (std::size_t j = 0; j < m; ++j) {
                    const std::size_t v = n + j;
                    if (done[v]) continue;
                    const double rc = std::max(0.0, crow[j] + pot[u] - pot[v]);
                    if (dist[u] + rc < dist[v]) {
                        dist[v] = dist[u] + rc;
                        parent[v] = static_cast<int>(u);
                    }
                }
            } else {
                const std::size_t j = u - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (done[i] || plan.flow[i * m + j] <= 0.0) continue;
                    const double rc = std::max(0.0, -cost[i * m + j] + pot[u] - pot[i]);
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        parent[i] = static_cast<int>(u);
                    }
                }
            }
        }
        require(target != nv, "solve_transport: no augmenting path (infeasible?)");

        // Bottleneck along the path.
        double bottleneck = rb[target - n];
        for (std::size_t v = target; parent[v] >= 0; v = static_cast<std::size_t>(parent[v])) {
            const std::size_t u = static_cast<std::size_t>(parent[v]);
            if (u >= n)  // backward arc sink u -> source v carries flow (v, u-n)
                bottleneck = std::min(bottleneck, plan.flow[v * m + (u - n)]);
        }
        {
            std::size_t v = target;
            while (parent[v] >= 0) v = static_cast<std::size_t>(parent[v]);
            bottleneck = std::min(bottleneck, ra[v]);
        }

        // Apply the augmentation.
        {
            std::size_t v = target;
            while (parent[v] >= 0) {
                const std::size_t u = static_cast<std::size_t>(parent[v]);
                if (u < n) {
                    double& f = plan.flow[u * m + (v - n)];
                    f += bottleneck;
                } else {
                    double& f = plan.flow[v * m + (u - n)];
                    f -= bottleneck;
                    if (f <= kMassEps) f = 0.0;
                }
                v = u;
            }
            ra[v] -= bottleneck;
            if (ra[v] < kMassEps) ra[v] = 0.0;
            rb[target - n] -= bottleneck;
            if (rb[target - n] < kMassEps) rb[target - n] = 0.0;
        }

        // Johnson potential update (cap distances at the target's value).
        const double dcap = dist[target];
        for (std::size_t v = 0; v < nv; ++v)
            pot[v] += std::min(dist[v], dcap);
        ++plan.augmentations;
    }

    // Cost and marginal residuals in fixed order.
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) c += plan.flow[i * m + j] * cost[i * m + j];
    plan.cost = c;
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += plan.flow[i * m + j];
        resid = std::max(resid, std::abs(s - a[i]));
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += plan.flow[i * m + j];
        resid = std::max(resid, std::abs(s - b[j]));
    }
    plan.max_marginal_residual = resid;
    return plan;
}

}  // namespace dalab
