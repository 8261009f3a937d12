#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dalab/filter.hpp"
#include "dalab/metric.hpp"
#include "dalab/model.hpp"
#include "dalab/prior.hpp"

using namespace dalab;

namespace {

NsModel small_model(std::size_t n_stages, int n = 16, double nu = 1e-2,
                    double t_end = 0.25) {
    NSConfig cfg;
    cfg.viscosity = nu;
    cfg.grid = Grid2(n);
    cfg.dt = t_end / static_cast<double>(n_stages * 20);  // 20 steps per stage
    cfg.t_end = t_end;
    return NsModel(cfg);
}

struct NsFixture {
    NsModel model;
    NoiseModel nm = NoiseModel::gaussian(identity_matrix(2), 2);
    std::vector<Observable> windows;
    std::vector<double> snaps;
    MeasurementSet ms;
    WeightedEnsemble<SpectralField> prior;

    explicit NsFixture(std::size_t n_members, std::size_t n_stages = 2,
                       std::uint64_t seed = 21)
        : model(small_model(n_stages)) {
        Observable proto;
        proto.map = PointwiseMap::identity;
        proto.phi.kind = SpatialWeight::Kind::cosine;
        windows = tile_windows(n_stages, 0.25, proto);
        std::vector<double> bp;
        for (std::size_t j = 0; j <= n_stages; ++j)
            bp.push_back(0.25 * static_cast<double>(j) / n_stages);
        snaps = stage_snapshot_grid(bp, 4, model.dt());

        PriorSpec spec;
        spec.k_max = 4;
        prior = sample_prior(spec, Grid2(16), n_members, seed);

        SpectralField truth = sample_prior_field(spec, Grid2(16), seed, 5555);
        Trajectory traj = model.segment(model.prepare_initial(truth), 0.0, 0.25, snaps);
        ms = synthesize_measurements(traj, windows, nm, 7, "draw", 1.0);
    }
};

}  // namespace

TEST_CASE("log likelihood closed forms (Gaussian)") {
    const NoiseModel nm = NoiseModel::gaussian(identity_matrix(2), 2);
    const double d = 2.0;
    // Phi = |y - L|^2/2 + (d/2) log(2 pi).
    const double phi0 = log_likelihood(nm, {0.3, -0.4}, {0.3, -0.4});
    CHECK(phi0 == doctest::Approx(0.5 * d * std::log(two_pi)).epsilon(1e-14));

    const double phi = log_likelihood(nm, {0.0, 0.0}, {1.0, 2.0});
    CHECK(phi == doctest::Approx(0.5 * 5.0 + 0.5 * d * std::log(two_pi)).epsilon(1e-14));

    // Lower bound Phi >= -C_rho with C_rho = max(0, log sup rho) = 0 here.
    const NoiseAuditReport audit = audit_noise(nm, 6.0, 400);
    CHECK(phi0 >= -audit.c_rho - 1e-12);
    // Tail-side upper bound Phi <= B_rho + |y-L|^2/2.
    CHECK(phi <= audit.b_rho + 0.5 * 5.0 + 1e-9);
}

TEST_CASE("smoothing posterior: trivial and two-member closed forms") {
    NsFixture fx(2);

    // k = 0 returns the prior unchanged.
    auto post0 = smoothing_posterior(fx.model, fx.prior, fx.windows, fx.ms, 0, fx.nm, fx.snaps);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(post0.weight(i) == doctest::Approx(0.5).epsilon(1e-14));

    // Dirac prior gets weight one for any measurement.
    WeightedEnsemble<SpectralField> dirac;
    dirac.members = {fx.prior.members[0]};
    dirac.log_weights = {0.0};
    auto postd = smoothing_posterior(fx.model, dirac, fx.windows, fx.ms, 2, fx.nm, fx.snaps);
    CHECK(postd.weight(0) == doctest::Approx(1.0).epsilon(1e-14));

    // Two members: weights follow the logistic form in the Phi difference.
    LikelihoodLedger ledger;
    auto post = smoothing_posterior(fx.model, fx.prior, fx.windows, fx.ms, 2, fx.nm, fx.snaps,
                                    &ledger);
    const double phi_sum0 = ledger.phi[0][0] + ledger.phi[1][0];
    const double phi_sum1 = ledger.phi[0][1] + ledger.phi[1][1];
    const double delta = phi_sum1 - phi_sum0;
    CHECK(post.weight(0) == doctest::Approx(1.0 / (1.0 + std::exp(-delta))).epsilon(1e-12));
    CHECK(post.weight(1) ==
          doctest::Approx(std::exp(-delta) / (1.0 + std::exp(-delta))).epsilon(1e-12));
}

TEST_CASE("recursive filter equals one-shot smoothing at every stage") {
    NsFixture fx(8, 3);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);
    REQUIRE(fd.n_stages() == 3);
    for (std::size_t k = 1; k <= 3; ++k) {
        auto post =
            smoothing_posterior(fx.model, fx.prior, fx.windows, fx.ms, k, fx.nm, fx.snaps);
        for (std::size_t i = 0; i < fx.prior.size(); ++i) {
            const double wr = std::exp(fd.stage_log_weights[k][i]);
            const double ws = std::exp(post.log_weights[i]);
            CHECK(std::abs(wr - ws) <= 1e-12 * ws);
        }
    }
}

TEST_CASE("filtering segments realize the push-forward identity exactly") {
    NsFixture fx(4, 2);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);
    for (std::size_t i = 0; i < fx.prior.size(); ++i) {
        auto traj = fx.model.segment(fx.model.prepare_initial(fx.prior.members[i]), 0.0, 0.25,
                                     fx.snaps);
        for (std::size_t j = 0; j < fd.segments.size(); ++j) {
            const auto& seg = fd.segments[j];
            for (std::size_t s = 0; s < seg.times.size(); ++s) {
                const std::size_t idx = traj.nearest(seg.times[s]);
                CHECK(seg.member_states[i][s].raw() == traj.states[idx].raw());
            }
        }
    }
}

TEST_CASE("empty measurement set gives the pure prior push-forward") {
    NsFixture fx(4, 2);
    auto fd = prior_pushforward(fx.model, fx.prior, 0.25, fx.snaps);
    CHECK(fd.segments.size() == 1);
    for (double lw : fd.stage_log_weights[0])
        CHECK(std::exp(lw) == doctest::Approx(0.25).epsilon(1e-14));
    // Dirac prior: the filtering distribution is the single trajectory.
    WeightedEnsemble<SpectralField> dirac;
    dirac.members = {fx.prior.members[1]};
    dirac.log_weights = {0.0};
    auto fdd = filter_recursive(fx.model, dirac, fx.windows, fx.ms, fx.nm, fx.snaps);
    for (const auto& lw : fdd.stage_log_weights) CHECK(std::exp(lw[0]) == 1.0);
}

TEST_CASE("weights are unchanged when Phi is constant across members") {
    // Two copies of the same member: Phi_j identical, so stage weights stay
    // exactly at their previous values.
    NsFixture fx(2, 2);
    WeightedEnsemble<SpectralField> twins;
    twins.members = {fx.prior.members[0], fx.prior.members[0]};
    twins.log_weights = {std::log(0.5), std::log(0.5)};
    auto fd = filter_recursive(fx.model, twins, fx.windows, fx.ms, fx.nm, fx.snaps);
    for (const auto& lw : fd.stage_log_weights) {
        CHECK(std::exp(lw[0]) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::exp(lw[1]) == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("permutation equivariance") {
    NsFixture fx(5, 2);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);

    std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    WeightedEnsemble<SpectralField> shuffled;
    for (std::size_t i : perm) {
        shuffled.members.push_back(fx.prior.members[i]);
        shuffled.log_weights.push_back(fx.prior.log_weights[i]);
    }
    auto fd_p = filter_recursive(fx.model, shuffled, fx.windows, fx.ms, fx.nm, fx.snaps);
    for (std::size_t k = 0; k < fd.stage_log_weights.size(); ++k)
        for (std::size_t i = 0; i < perm.size(); ++i)
            CHECK(fd_p.stage_log_weights[k][i] ==
                  doctest::Approx(fd.stage_log_weights[k][perm[i]]).epsilon(1e-13));
}

TEST_CASE("all stage weights stay strictly positive") {
    NsFixture fx(6, 3);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);
    for (const auto& stage : fd.stage_log_weights)
        for (double lw : stage) CHECK(std::isfinite(lw));
}

TEST_CASE("posterior density bounds certificate") {
    NsFixture fx(6, 2);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);
    const NoiseAuditReport audit = audit_noise(fx.nm, 8.0, 600);
    DensityBoundReport rep = posterior_density_bounds(fd, fx.ms, fx.nm, audit);
    REQUIRE(rep.stages.size() == 2);
    CHECK(rep.all_pass());
    for (const auto& st : rep.stages) {
        CHECK(st.slack_z >= 0.0);
        CHECK(st.slack_ratio >= 0.0);
    }

    // Dirac prior: Z = exp(-Phi) and the bound holds with explicit slack.
    WeightedEnsemble<SpectralField> dirac;
    dirac.members = {fx.prior.members[0]};
    dirac.log_weights = {0.0};
    auto fdd = filter_recursive(fx.model, dirac, fx.windows, fx.ms, fx.nm, fx.snaps);
    CHECK(fdd.ledger.log_z[0] == doctest::Approx(-fdd.ledger.phi[0][0]).epsilon(1e-12));
    DensityBoundReport repd = posterior_density_bounds(fdd, fx.ms, fx.nm, audit);
    CHECK(repd.all_pass());
}

TEST_CASE("expectation over the filtering distribution") {
    NsFixture fx(4, 2);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);

    // Constant functional returns its value at any time.
    for (double t : {0.0, 0.1, 0.2, 0.25})
        CHECK(expectation(fd, t, [](const SpectralField&) { return 3.25; }) ==
              doctest::Approx(3.25).epsilon(1e-12));

    // Dirac ensemble: expectation of the norm tracks the trajectory.
    WeightedEnsemble<SpectralField> dirac;
    dirac.members = {fx.prior.members[2]};
    dirac.log_weights = {0.0};
    auto fdd = filter_recursive(fx.model, dirac, fx.windows, fx.ms, fx.nm, fx.snaps);
    auto traj = fx.model.segment(fx.model.prepare_initial(dirac.members[0]), 0.0, 0.25,
                                 fx.snaps);
    for (double t : {0.0, 0.125, 0.25}) {
        const double expect =
            expectation(fdd, t, [](const SpectralField& u) { return l2_norm(u); });
        CHECK(expect == doctest::Approx(l2_norm(traj.states[traj.nearest(t)])).epsilon(1e-12));
    }

    CHECK_THROWS_AS(expectation(fd, -0.5, [](const SpectralField&) { return 0.0; }),
                    std::invalid_argument);
    CHECK_THROWS_AS(expectation(fd, 0.5, [](const SpectralField&) { return 0.0; }),
                    std::invalid_argument);
}

TEST_CASE("expectations are Lipschitz in the measurements (Remark-level check)") {
    NsFixture fx(8, 2);
    auto fd = filter_recursive(fx.model, fx.prior, fx.windows, fx.ms, fx.nm, fx.snaps);
    auto functional = [](const SpectralField& u) { return l2_norm(u); };

    // Perturb y by a small Gamma-ball step and check |E - E'| <= C |y-y'|
    // with C from the d_T stability of the same pair (Kantorovich duality:
    // the norm functional is 1-Lipschitz).
    MeasurementSet ms2 = fx.ms;
    ms2.values[0][0] += 0.05;
    ms2.values[1][1] -= 0.05;
    auto fd2 = filter_recursive(fx.model, fx.prior, fx.windows, ms2, fx.nm, fx.snaps);
    DTResult dt = d_T(fd2, fd,
                      [](const SpectralField& a, const SpectralField& b) {
                          return l2_distance(a, b);
                      },
                      4);
    for (double t : {0.06, 0.15, 0.22}) {
        const double e1 = expectation(fd, t, functional);
        const double e2 = expectation(fd2, t, functional);
        CHECK(std::abs(e1 - e2) <= dt.sup_w1 * (1 + 1e-9));
    }
}

TEST_CASE("burgers filter: equivalence carries over to the FV model") {
    FVConfig cfg;
    cfg.n_cells = 64;
    cfg.dt = 0.25 / 80.0;
    cfg.t_end = 0.25;
    BurgersModel model(cfg);
    PriorSpec spec;
    spec.k_max = 3;
    auto prior = sample_prior_claw(spec, 64, 6, 13);

    Observable proto;
    proto.map = PointwiseMap::component;
    proto.phi.kind = SpatialWeight::Kind::cosine;
    auto windows = tile_windows(2, 0.25, proto);
    const NoiseModel nm = NoiseModel::gaussian(identity_matrix(1), 1);
    std::vector<double> bp = {0.0, 0.125, 0.25};
    auto snaps = stage_snapshot_grid(bp, 4, model.dt());
    CellField truth = sample_prior_cells(spec, 64, 13, 999);
    auto truth_traj = model.segment(truth, 0.0, 0.25, snaps);
    MeasurementSet ms = synthesize_measurements(truth_traj, windows, nm, 3, "draw", 1.0);

    auto fd = filter_recursive(model, prior, windows, ms, nm, snaps);
    for (std::size_t k = 1; k <= 2; ++k) {
        auto post = smoothing_posterior(model, prior, windows, ms, k, nm, snaps);
        for (std::size_t i = 0; i < prior.size(); ++i) {
            const double ws = std::exp(post.log_weights[i]);
            CHECK(std::abs(std::exp(fd.stage_log_weights[k][i]) - ws) <= 1e-12 * ws);
        }
    }
}
