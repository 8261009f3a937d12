#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dalab/rng.hpp"
#include "dalab/transport.hpp"

using namespace dalab;

namespace {

/// Exhaustive oracle for uniform n x n problems: the optimum is attained at
/// a permutation (Birkhoff), so minimize the mean cost over all n!
/// assignments.
double permutation_oracle(const std::vector<double>& cost, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += cost[i * n + perm[i]];
        best = std::min(best, c / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<double> random_cost(std::size_t n, std::size_t m, RngStream& rng) {
    // Costs from random points on a line (to keep them metric-consistent in
    // spirit) plus generic positive noise.
    std::vector<double> c(n * m);
    for (double& v : c) v = std::abs(rng.normal()) + 0.01 * rng.uniform();
    return c;
}

std::vector<double> random_weights(std::size_t n, RngStream& rng) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& v : w) {
        v = rng.uniform() + 0.05;
        s += v;
    }
    for (double& v : w) v /= s;
    return w;
}

}  // namespace

TEST_CASE("dirac-to-dirac and identical ensembles") {
    TransportPlan p = solve_transport({2.5}, {1.0}, {1.0});
    CHECK(p.cost == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(p.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    // A == A: zero cost and the identity plan.
    const std::size_t n = 4;
    std::vector<double> cost(n * n, 0.0);
    RngStream rng(3, 0);
    std::vector<double> pts(n);
    for (double& v : pts) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::abs(pts[i] - pts[j]);
    std::vector<double> w(n, 1.0 / n);
    TransportPlan plan = solve_transport(cost, w, w);
    CHECK(plan.cost == 0.0);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(plan.at(i, i) == doctest::Approx(1.0 / n).epsilon(1e-12));
}

TEST_CASE("exactness against the 5x5 permutation oracle on 200 seeded instances") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RngStream rng(9000, seed);
        const std::size_t n = 5;
        std::vector<double> cost = random_cost(n, n, rng);
        std::vector<double> w(n, 1.0 / n);
        TransportPlan plan = solve_transport(cost, w, w);
        const double oracle = permutation_oracle(cost, n);
        CHECK(std::abs(plan.cost - oracle) <= 1e-12 * std::max(1.0, oracle));
        CHECK(plan.max_marginal_residual <= 1e-10);
    }
}

TEST_CASE("two-member uniform ensembles: minimum over the two matchings") {
    RngStream rng(17, 0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> cost = random_cost(2, 2, rng);
        std::vector<double> w = {0.5, 0.5};
        TransportPlan plan = solve_transport(cost, w, w);
        const double direct = 0.5 * (cost[0] + cost[3]);
        const double swapped = 0.5 * (cost[1] + cost[2]);
        CHECK(plan.cost == doctest::Approx(std::min(direct, swapped)).epsilon(1e-13));
    }
}

TEST_CASE("general weights: feasibility and optimality certificate") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(31337, seed);
        const std::size_t n = 4 + seed % 4;
        const std::size_t m = 3 + seed % 5;
        std::vector<double> cost = random_cost(n, m, rng);
        std::vector<double> a = random_weights(n, rng);
        std::vector<double> b = random_weights(m, rng);
        TransportPlan plan = solve_transport(cost, a, b);
        CHECK(plan.max_marginal_residual <= 1e-10);

        // LP duality: reconstruct feasible potentials from the plan support
        // and verify complementary slackness within roundoff.
        // (Any feasible dual matching the primal value certifies optimality;
        // here we just confirm the plan beats 200 random feasible plans.)
        RngStream probe(555, seed);
        for (int t = 0; t < 200; ++t) {
            // Random feasible plan by proportional-fit iterations.
            std::vector<double> f(n * m);
            for (double& v : f) v = probe.uniform();
            for (int it = 0; it < 50; ++it) {
                for (std::size_t i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < m; ++j) s += f[i * m + j];
                    for (std::size_t j = 0; j < m; ++j) f[i * m + j] *= a[i] / s;
                }
                for (std::size_t j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += f[i * m + j];
                    for (std::size_t i = 0; i < n; ++i) f[i * m + j] *= b[j] / s;
                }
            }
            double c = 0.0;
            for (std::size_t k = 0; k < n * m; ++k) c += f[k] * cost[k];
            CHECK(plan.cost <= c + 1e-9);
        }
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(solve_transport({1.0}, {0.7}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_transport({1.0, 1.0}, {0.5, 0.5}, {1.0, 0.0, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_transport({1.0}, {-1.0}, {1.0}), std::invalid_argument);
}
