#pragma once

#include "dalab/ensemble.hpp"
#include "dalab/fv_solver.hpp"
#include "dalab/spectral_field.hpp"

namespace dalab {

/// Random-field prior with algebraic spectral decay and exactly bounded
/// support: coefficient stddev sigma*|k|^{-alpha} for 1 <= |k|_inf <= k_max,
/// zero mean mode, optional Leray projection, and radial rescaling onto the
/// L2 ball of radius M. Samples are pinned by (seed, member index).
struct PriorSpec {
    double alpha = 2.0;        // decay exponent, > 1
    int k_max = 4;             // mode cutoff
    double support_radius = 1.0;  // M
    double sigma = 1.0;
    bool divergence_free = true;

    void validate() const {
        require(alpha > 1.0, "PriorSpec: alpha must exceed 1");
        require(support_radius > 0.0, "PriorSpec: support radius must be positive");
        require(k_max >= 1, "PriorSpec: k_max must be >= 1");
        require(sigma > 0.0, "PriorSpec: sigma must be positive");
    }
};

/// One 2D draw on the given truncation (k_max is clamped to the band).
SpectralField sample_prior_field(const PriorSpec& spec, Grid2 grid, std::uint64_t seed,
                                 std::uint64_t member);

/// One 1D draw sampled at cell midpoints.
CellField sample_prior_cells(const PriorSpec& spec, std::size_t n_cells, std::uint64_t seed,
                             std::uint64_t member);

WeightedEnsemble<SpectralField> sample_prior(const PriorSpec& spec, Grid2 grid, std::size_t n,
                                             std::uint64_t seed);

WeightedEnsemble<CellField> sample_prior_claw(const PriorSpec& spec, std::size_t n_cells,
                                              std::size_t n, std::uint64_t seed);

}  // namespace dalab
