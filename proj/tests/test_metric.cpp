#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dalab/metric.hpp"
#include "dalab/rng.hpp"

using namespace dalab;

namespace {

double dist1d(const double& a, const double& b) { return std::abs(a - b); }

WeightedEnsemble<double> random_ensemble(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 0);
    WeightedEnsemble<double> e;
    e.members.resize(n);
    e.log_weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        e.members[i] = rng.normal();
        e.log_weights[i] = -0.5 * rng.uniform();
    }
    e.normalize();
    return e;
}

}  // namespace

TEST_CASE("w1 on diracs and identical ensembles") {
    WeightedEnsemble<double> a;
    a.members = {1.0};
    a.log_weights = {0.0};
    WeightedEnsemble<double> b;
    b.members = {-2.0};
    b.log_weights = {0.0};
    W1Result r = w1(a, b, dist1d);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-14));

    WeightedEnsemble<double> c = random_ensemble(6, 4);
    W1Result same = w1(c, c, dist1d);
    CHECK(same.value == 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(same.plan.at(i, i) == doctest::Approx(c.weight(i)).epsilon(1e-10));
}

TEST_CASE("w1 rejects unnormalized input") {
    WeightedEnsemble<double> a;
    a.members = {0.0, 1.0};
    a.log_weights = {std::log(0.6), std::log(0.6)};
    WeightedEnsemble<double> b = random_ensemble(2, 1);
    CHECK_THROWS_AS(w1(a, b, dist1d), std::invalid_argument);
}

TEST_CASE("metric axioms on random triples") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto A = random_ensemble(4 + seed % 3, 100 + seed);
        auto B = random_ensemble(3 + seed % 4, 200 + seed);
        auto C = random_ensemble(5, 300 + seed);
        const double ab = w1(A, B, dist1d).value;
        const double ba = w1(B, A, dist1d).value;
        const double bc = w1(B, C, dist1d).value;
        const double ac = w1(A, C, dist1d).value;
        CHECK(std::abs(ab - ba) <= 1e-10);
        CHECK(ac <= ab + bc + 1e-10);
        CHECK(ab >= 0.0);
    }
}

TEST_CASE("kantorovich lower bound sandwich and tightness on diracs") {
    WeightedEnsemble<double> a;
    a.members = {0.7};
    a.log_weights = {0.0};
    WeightedEnsemble<double> b;
    b.members = {-1.1};
    b.log_weights = {0.0};
    std::vector<const double*> anchors = {&a.members[0], &b.members[0]};
    const double lb = kantorovich_lower_bound(a, b, anchors, dist1d);
    CHECK(lb == doctest::Approx(1.8).epsilon(1e-14));  // anchor at v recovers |u-v|

    CHECK(kantorovich_lower_bound(a, b, {}, dist1d) == 0.0);

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto A = random_ensemble(5, 40 + seed);
        auto B = random_ensemble(4, 80 + seed);
        std::vector<const double*> probes;
        for (const auto& m : A.members) probes.push_back(&m);
        for (const auto& m : B.members) probes.push_back(&m);
        const double primal = w1(A, B, dist1d).value;
        const double dual = kantorovich_lower_bound(A, B, probes, dist1d);
        CHECK(dual <= primal + 1e-12);
    }
}

TEST_CASE("pushforward Lipschitz constant is attained on diracs (optimality)") {
    // F(x) = 2x has Lip(F) = 2; on dirac pairs the W1 ratio equals the
    // pointwise ratio exactly, which is where the optimal constant lives.
    auto push = [](double x) { return 2.0 * x; };
    RngStream rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const double x = rng.normal(), y = rng.normal();
        if (x == y) continue;
        WeightedEnsemble<double> dx, dy;
        dx.members = {push(x)};
        dx.log_weights = {0.0};
        dy.members = {push(y)};
        dy.log_weights = {0.0};
        const double ratio = w1(dx, dy, dist1d).value / std::abs(x - y);
        CHECK(ratio == doctest::Approx(2.0).epsilon(1e-12));
    }
}

namespace {

/// Two-member, two-stage fixture with hand-set weights; members move along
/// u0(t) = t and u1(t) = t + 1, so every node cost is exactly 1.
FilteringDistribution<double> fixture(const std::vector<std::vector<double>>& stage_weights) {
    FilteringDistribution<double> fd;
    fd.breakpoints = {0.0, 1.0, 2.0};
    for (int j = 0; j < 2; ++j) {
        FilteringDistribution<double>::Segment seg;
        seg.times = {j * 1.0, j + 0.5, j + 1.0};
        seg.member_states.resize(2);
        for (double t : seg.times) {
            seg.member_states[0].push_back(t);
            seg.member_states[1].push_back(t + 1.0);
        }
        fd.segments.push_back(seg);
    }
    for (const auto& w : stage_weights) {
        std::vector<double> lw;
        for (double v : w) lw.push_back(std::log(v));
        fd.stage_log_weights.push_back(lw);
    }
    return fd;
}

}  // namespace

TEST_CASE("d_T: hand-computed two-stage fixture") {
    auto F = fixture({{0.75, 0.25}, {0.5, 0.5}, {0.9, 0.1}});
    auto G = fixture({{0.5, 0.5}, {0.25, 0.75}, {0.9, 0.1}});

    // Same atoms, weight mismatch 0.25 on both stages; atom distance 1.
    DTResult res = d_T(F, G, dist1d, 1);
    CHECK(res.d_t == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.sup_w1 == doctest::Approx(0.25).epsilon(1e-12));

    DTResult self = d_T(F, F, dist1d, 1);
    CHECK(self.d_t == 0.0);
    CHECK(self.sup_w1 == 0.0);
}

TEST_CASE("d_T: constant dirac pair integrates to T * distance") {
    auto make_dirac = [](double value) {
        FilteringDistribution<double> fd;
        fd.breakpoints = {0.0, 2.0};
        FilteringDistribution<double>::Segment seg;
        seg.times = {0.0, 0.5, 1.0, 1.5, 2.0};
        seg.member_states = {{value, value, value, value, value}};
        fd.segments.push_back(seg);
        fd.stage_log_weights = {{0.0}, {0.0}};
        return fd;
    };
    auto F = make_dirac(0.3);
    auto G = make_dirac(-0.9);
    DTResult res = d_T(F, G, dist1d, 3);
    CHECK(res.d_t == doctest::Approx(2.0 * 1.2).epsilon(1e-12));
    CHECK(res.sup_w1 == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("d_T rejects mismatched horizons") {
    auto F = fixture({{0.75, 0.25}, {0.5, 0.5}, {0.9, 0.1}});
    auto G = F;
    G.breakpoints.back() = 3.0;
    CHECK_THROWS_AS(d_T(F, G, dist1d, 1), std::invalid_argument);
}

TEST_CASE("lipschitz_fit") {
    // Exactly linear data recovers the slope.
    LipschitzFit f = lipschitz_fit({1.0, 2.0, 3.0}, {2.5, 5.0, 7.5});
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(f.max_ratio == doctest::Approx(2.5).epsilon(1e-14));

    LipschitzFit single = lipschitz_fit({2.0}, {1.0});
    CHECK(single.max_ratio == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(single.slope == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(lipschitz_fit({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(lipschitz_fit({0.0}, {1.0}), std::invalid_argument);
}
