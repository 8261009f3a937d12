#include "dalab/prior.hpp"

#include <algorithm>
#include <cmath>

#include "dalab/rng.hpp"

namespace dalab {

SpectralField sample_prior_field(const PriorSpec& spec, Grid2 grid, std::uint64_t seed,
                                 std::uint64_t member) {
    spec.validate();
    RngStream rng(seed, member);
    SpectralField u(grid);
    const int kc = std::min(spec.k_max, grid.n_modes);
    // Draw the half-space (kx,ky) > 0 lexicographically; mirror conjugates.
    for (int kx = 0; kx <= kc; ++kx) {
        for (int ky = (kx == 0 ? 1 : -kc); ky <= kc; ++ky) {
            const double kabs = std::sqrt(double(kx) * kx + double(ky) * ky);
            const double sd = spec.sigma * std::pow(kabs, -spec.alpha);
            for (int c = 0; c < SpectralField::n_components; ++c) {
                // Complex Gaussian with E|z|^2 = sd^2.
                complexd z = rng.complex_normal() * (sd / std::sqrt(2.0));
                u.at(c, kx, ky) = z;
                u.at(c, -kx, -ky) = std::conj(z);
            }
        }
    }
    if (spec.divergence_free) u = leray_project(u);
    const double nrm = l2_norm(u);
    if (nrm > spec.support_radius) u *= spec.support_radius / nrm;
    return u;
}

CellField sample_prior_cells(const PriorSpec& spec, std::size_t n_cells, std::uint64_t seed,
                             std::uint64_t member) {
    spec.validate();
    RngStream rng(seed, member);
    const int kc = std::min<int>(spec.k_max, static_cast<int>(n_cells) / 2 - 1);
    std::vector<double> a(kc + 1, 0.0), b(kc + 1, 0.0);
    for (int k = 1; k <= kc; ++k) {
        const double sd = spec.sigma * std::pow(double(k), -spec.alpha);
        a[k] = sd * rng.normal();
        b[k] = sd * rng.normal();
    }
    CellField u = sample_cells(n_cells, [&](double x) {
        double v = 0.0;
        for (int k = 1; k <= kc; ++k) v += a[k] * std::cos(k * x) + b[k] * std::sin(k * x);
        return v;
    });
    const double nrm = l2_norm(u);
    if (nrm > spec.support_radius) {
        const double s = spec.support_radius / nrm;
        for (double& v : u.values) v *= s;
    }
    return u;
}

WeightedEnsemble<SpectralField> sample_prior(const PriorSpec& spec, Grid2 grid, std::size_t n,
                                             std::uint64_t seed) {
    require(n >= 1, "sample_prior: n must be >= 1");
    std::vector<SpectralField> members(n);
    parallel_for(n, [&](std::size_t i) {
        members[i] = sample_prior_field(spec, grid, seed, static_cast<std::uint64_t>(i));
    });
    return WeightedEnsemble<SpectralField>::uniform(std::move(members));
}

WeightedEnsemble<CellField> sample_prior_claw(const PriorSpec& spec, std::size_t n_cells,
                                              std::size_t n, std::uint64_t seed) {
    require(n >= 1, "sample_prior_claw: n must be >= 1");
    std::vector<CellField> members(n);
    parallel_for(n, [&](std::size_t i) {
        members[i] = sample_prior_cells(spec, n_cells, seed, static_cast<std::uint64_t>(i));
    });
    return WeightedEnsemble<CellField>::uniform(std::move(members));
}

}  // namespace dalab
