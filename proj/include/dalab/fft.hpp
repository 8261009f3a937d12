#pragma once

#include <vector>

#include "dalab/common.hpp"
#include "dalab/spectral_field.hpp"

namespace dalab {

/// Physical-space samples of a vector field on an m x m uniform grid over
/// [0,2pi)^2, row-major in (ix, iy), one block per component.
struct PhysicalField {
    int m = 0;
    std::vector<double> values;  // size n_components * m * m

    double& at(int comp, int ix, int iy) {
        return values[(static_cast<std::size_t>(comp) * m + ix) * m + iy];
    }
    double at(int comp, int ix, int iy) const {
        return values[(static_cast<std::size_t>(comp) * m + ix) * m + iy];
    }
};

/// Evaluate the truncated series on an m_quad x m_quad grid (pseudo-spectral
/// path, exact for band-limited fields when m_quad >= 2N+1).
PhysicalField to_physical(const SpectralField& field, int m_quad);

/// Recover coefficients |k|_inf <= n_modes from grid samples; requires
/// samples.m >= 2*n_modes+1 for an alias-free round trip.
SpectralField from_physical(const PhysicalField& samples, int n_modes);

namespace fft {

/// In-order 2D complex DFT of an m x m row-major array, forward means
/// exponent sign -1 (analysis without normalization); the inverse applies
/// sign +1 and no 1/m^2 factor either. Plans are cached per (m, sign) and
/// creation is serialized; execution is safe to call concurrently.
void dft2(std::vector<complexd>& data, int m, bool forward);

}  // namespace fft

}  // namespace dalab
