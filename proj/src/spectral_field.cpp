#include "dalab/spectral_field.hpp"

#include <algorithm>
#include <cmath>

namespace dalab {

void SpectralField::symmetrize() {
    const int n = grid_.n_modes;
    for (int c = 0; c < n_components; ++c) {
        for (int kx = -n; kx <= n; ++kx) {
            for (int ky = -n; ky <= n; ++ky) {
                if (kx < 0 || (kx == 0 && ky < 0)) continue;
                complexd a = at(c, kx, ky);
                complexd b = at(c, -kx, -ky);
                complexd avg = 0.5 * (a + std::conj(b));
                at(c, kx, ky) = avg;
                at(c, -kx, -ky) = std::conj(avg);
            }
        }
    }
    for (int c = 0; c < n_components; ++c) at(c, 0, 0) = complexd(at(c, 0, 0).real(), 0.0);
}

double SpectralField::hermitian_residual() const {
    const int n = grid_.n_modes;
    double worst = 0.0, scale = 0.0;
    for (int c = 0; c < n_components; ++c)
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky) {
                complexd a = at(c, kx, ky);
                scale = std::max(scale, std::abs(a));
                worst = std::max(worst, std::abs(a - std::conj(at(c, -kx, -ky))));
            }
    return scale > 0.0 ? worst / scale : 0.0;
}

double SpectralField::divergence_residual() const {
    const int n = grid_.n_modes;
    double worst = 0.0, scale = 0.0;
    for (int kx = -n; kx <= n; ++kx)
        for (int ky = -n; ky <= n; ++ky) {
            complexd u1 = at(0, kx, ky), u2 = at(1, kx, ky);
            scale = std::max({scale, std::abs(u1), std::abs(u2)});
            worst = std::max(worst, std::abs(double(kx) * u1 + double(ky) * u2));
        }
    return scale > 0.0 ? worst / scale : 0.0;
}

bool SpectralField::all_finite() const {
    for (const complexd& z : coeffs_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require(same_shape(o), "SpectralField: grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require(same_shape(o), "SpectralField: grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (complexd& z : coeffs_) z *= s;
    return *this;
}

SpectralField fourier_project(const SpectralField& field, int m) {
    require(m >= 0, "fourier_project: m must be nonnegative");
    require(m <= field.grid().n_modes, "fourier_project: m exceeds the stored band");
    SpectralField out = field;
    const int n = field.grid().n_modes;
    for (int c = 0; c < SpectralField::n_components; ++c)
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky)
                if (std::max(std::abs(kx), std::abs(ky)) > m) out.at(c, kx, ky) = 0.0;
    return out;
}

SpectralField leray_project(const SpectralField& field) {
    SpectralField out = field;
    const int n = field.grid().n_modes;
    for (int kx = -n; kx <= n; ++kx)
        for (int ky = -n; ky <= n; ++ky) {
            if (kx == 0 && ky == 0) continue;
            const double k2 = double(kx) * kx + double(ky) * ky;
            complexd u1 = field.at(0, kx, ky), u2 = field.at(1, kx, ky);
            complexd dot = (double(kx) * u1 + double(ky) * u2) / k2;
            out.at(0, kx, ky) = u1 - double(kx) * dot;
            out.at(1, kx, ky) = u2 - double(ky) * dot;
        }
    out.set_divergence_free_flag(true);
    return out;
}

double l2_norm(const SpectralField& field) {
    double s = 0.0;
    for (const complexd& z : field.raw()) s += std::norm(z);
    return two_pi * std::sqrt(s);
}

double sobolev_norm(const SpectralField& field, double s) {
    const int n = field.grid().n_modes;
    double acc = 0.0;
    for (int c = 0; c < SpectralField::n_components; ++c)
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky) {
                const double k2 = double(kx) * kx + double(ky) * ky;
                acc += std::pow(1.0 + k2, s) * std::norm(field.at(c, kx, ky));
            }
    return two_pi * std::sqrt(acc);
}

double l2_distance(const SpectralField& a, const SpectralField& b) {
    require(a.same_shape(b), "l2_distance: grid mismatch");
    double s = 0.0;
    const auto& ra = a.raw();
    const auto& rb = b.raw();
    for (std::size_t i = 0; i < ra.size(); ++i) s += std::norm(ra[i] - rb[i]);
    return two_pi * std::sqrt(s);
}

double grad_norm(const SpectralField& field) {
    const int n = field.grid().n_modes;
    double acc = 0.0;
    for (int c = 0; c < SpectralField::n_components; ++c)
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky)
                acc += (double(kx) * kx + double(ky) * ky) * std::norm(field.at(c, kx, ky));
    return two_pi * std::sqrt(acc);
}

}  // namespace dalab
