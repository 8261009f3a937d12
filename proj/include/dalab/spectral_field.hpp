#pragma once

#include <vector>

#include "dalab/common.hpp"
#include "dalab/grid.hpp"

namespace dalab {

/// Divergence-free-capable periodic vector field on [0,2pi]^2, stored as
/// truncated Fourier coefficients over the full square |k|_inf <= N (both
/// half-spaces kept; Hermitian symmetry is an enforced invariant, not a
/// storage optimization). Two components.
///
/// Instances are plain values: immutable-after-construction by convention in
/// the solvers, safe to share across threads.
class SpectralField {
  public:
    static constexpr int n_components = 2;

    SpectralField() = default;
    explicit SpectralField(Grid2 grid)
        : grid_(grid),
          coeffs_(static_cast<std::size_t>(n_components) * grid.modes_per_dim() *
                  grid.modes_per_dim()) {}

    const Grid2& grid() const { return grid_; }
    bool divergence_free_flag() const { return div_free_; }
    void set_divergence_free_flag(bool f) { div_free_ = f; }

    /// kx, ky in [-N, N].
    complexd& at(int comp, int kx, int ky) { return coeffs_[index(comp, kx, ky)]; }
    const complexd& at(int comp, int kx, int ky) const { return coeffs_[index(comp, kx, ky)]; }

    std::vector<complexd>& raw() { return coeffs_; }
    const std::vector<complexd>& raw() const { return coeffs_; }

    std::size_t index(int comp, int kx, int ky) const {
        const int n = grid_.n_modes;
        const int m = grid_.modes_per_dim();
        return (static_cast<std::size_t>(comp) * m + (kx + n)) * m + (ky + n);
    }

    bool same_shape(const SpectralField& other) const { return grid_ == other.grid_; }

    /// coeff(-k) <- conj(coeff(k)) averaged pairwise, making the physical
    /// field exactly real.
    void symmetrize();

    /// Largest relative Hermitian-symmetry violation (0 for a real field).
    double hermitian_residual() const;

    /// max_k |<k, u_k>| / max_k |u_k|, the relative divergence residual.
    double divergence_residual() const;

    bool all_finite() const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);

  private:
    Grid2 grid_;
    std::vector<complexd> coeffs_;
    bool div_free_ = false;
};

/// P_m: zero every coefficient with |k|_inf > m. m = N is the identity.
SpectralField fourier_project(const SpectralField& field, int m);

/// Per-mode orthogonal projection onto divergence-free fields,
/// u_k <- (I - k k^T/|k|^2) u_k for k != 0; the mean mode passes through.
SpectralField leray_project(const SpectralField& field);

/// Parseval value sqrt((2pi)^2 sum_k |u_k|^2) over both components.
double l2_norm(const SpectralField& field);

/// sqrt((2pi)^2 sum_k (1+|k|^2)^s |u_k|^2); s may be negative.
double sobolev_norm(const SpectralField& field, double s);

double l2_distance(const SpectralField& a, const SpectralField& b);

/// Discrete gradient norm sqrt((2pi)^2 sum_k |k|^2 |u_k|^2) (enstrophy^(1/2)).
double grad_norm(const SpectralField& field);

}  // namespace dalab
