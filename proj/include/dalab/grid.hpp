#pragma once

#include "dalab/common.hpp"

namespace dalab {

/// Fourier truncation on the fixed torus [0,2pi]^2. Delta = 1/N by
/// convention; the retained band is |k|_inf <= N.
struct Grid2 {
    int n_modes = 0;

    Grid2() = default;
    explicit Grid2(int n) : n_modes(n) {
        require(n >= 2 && n % 2 == 0, "Grid2: N must be >= 2 and even");
    }

    double delta() const { return 1.0 / static_cast<double>(n_modes); }
    int modes_per_dim() const { return 2 * n_modes + 1; }

    bool operator==(const Grid2&) const = default;
};

}  // namespace dalab
