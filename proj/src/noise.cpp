#include "dalab/noise.hpp"

#include <algorithm>
#include <cmath>

namespace dalab {

std::vector<double> cholesky(const std::vector<double>& matrix, int dim) {
    require(matrix.size() == static_cast<std::size_t>(dim) * dim, "cholesky: size mismatch");
    std::vector<double> L(matrix.size(), 0.0);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = matrix[static_cast<std::size_t>(i) * dim + j];
            for (int k = 0; k < j; ++k)
                s -= L[static_cast<std::size_t>(i) * dim + k] *
                     L[static_cast<std::size_t>(j) * dim + k];
            if (i == j) {
                if (s <= 0.0) throw ConfigError("cholesky: matrix is not SPD");
                L[static_cast<std::size_t>(i) * dim + j] = std::sqrt(s);
            } else {
                L[static_cast<std::size_t>(i) * dim + j] =
                    s / L[static_cast<std::size_t>(j) * dim + j];
            }
        }
    }
    // Symmetry check against the upper triangle.
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            require(std::abs(matrix[static_cast<std::size_t>(i) * dim + j] -
                             matrix[static_cast<std::size_t>(j) * dim + i]) <=
                        1e-12 * (1.0 + std::abs(matrix[static_cast<std::size_t>(i) * dim + j])),
                    "cholesky: matrix is not symmetric");
    return L;
}

std::vector<double> identity_matrix(int dim) {
    std::vector<double> m(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) m[static_cast<std::size_t>(i) * dim + i] = 1.0;
    return m;
}

std::vector<double> diagonal_matrix(const std::vector<double>& diag) {
    const int d = static_cast<int>(diag.size());
    std::vector<double> m(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i) * d + i] = diag[i];
    return m;
}

NoiseModel::NoiseModel(Kind kind, std::vector<double> gamma, int dim, double mixture_weight,
                       double kappa)
    : kind_(kind), dim_(dim), gamma_(std::move(gamma)), mixture_weight_(mixture_weight),
      kappa_(kappa) {
    require(dim_ >= 1, "NoiseModel: dimension must be positive");
    chol_ = cholesky(gamma_, dim_);
    log_det_gamma_ = 0.0;
    for (int i = 0; i < dim_; ++i)
        log_det_gamma_ += 2.0 * std::log(chol_[static_cast<std::size_t>(i) * dim_ + i]);
    if (kind_ == Kind::gaussian_mixture) {
        require(mixture_weight_ > 0.0 && mixture_weight_ < 1.0,
                "NoiseModel: mixture weight must lie in (0,1)");
        require(kappa_ > 1.0, "NoiseModel: kappa must exceed 1");
    }
}

double NoiseModel::gamma_norm(const std::vector<double>& y) const {
    require(y.size() == static_cast<std::size_t>(dim_), "gamma_norm: dimension mismatch");
    // Solve L z = y; |y|_Gamma = ||z||_2.
    std::vector<double> z(y);
    for (int i = 0; i < dim_; ++i) {
        double s = z[i];
        for (int k = 0; k < i; ++k) s -= chol_[static_cast<std::size_t>(i) * dim_ + k] * z[k];
        z[i] = s / chol_[static_cast<std::size_t>(i) * dim_ + i];
    }
    double n2 = 0.0;
    for (double v : z) n2 += v * v;
    return std::sqrt(n2);
}

double NoiseModel::log_density(const std::vector<double>& y) const {
    const double q = gamma_norm(y);
    const double gauss_const = -0.5 * (dim_ * std::log(two_pi) + log_det_gamma_);
    switch (kind_) {
        case Kind::gaussian:
            return gauss_const - 0.5 * q * q;
        case Kind::gaussian_mixture: {
            const double l1 = std::log(mixture_weight_) + gauss_const - 0.5 * q * q;
            const double l2 = std::log1p(-mixture_weight_) + gauss_const -
                              dim_ * std::log(kappa_) - 0.5 * q * q / (kappa_ * kappa_);
            return log_sum_exp({l1, l2});
        }
        default: {
            // c (1 - |y|^2_Gamma)_+ with c normalizing over the Gamma-ellipsoid.
            if (q >= 1.0) return -std::numeric_limits<double>::infinity();
            const double vd = std::pow(two_pi / 2.0, 0.5 * dim_) / std::tgamma(0.5 * dim_ + 1.0);
            const double mass = 0.5 * log_det_gamma_ +
                                std::log(vd * 2.0 / (dim_ + 2.0));
            return std::log1p(-q * q) - mass;
        }
    }
}

std::vector<double> NoiseModel::sample(RngStream& rng) const {
    std::vector<double> z(dim_);
    if (kind_ == Kind::compact_support) {
        // Rejection from the unit Gamma-ball, then map through the factor.
        while (true) {
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) {
                z[i] = 2.0 * rng.uniform() - 1.0;
                r2 += z[i] * z[i];
            }
            if (r2 < 1.0 && rng.uniform() < (1.0 - r2)) break;
        }
    } else {
        for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
        if (kind_ == Kind::gaussian_mixture && rng.uniform() >= mixture_weight_)
            for (double& v : z) v *= kappa_;
    }
    std::vector<double> y(dim_, 0.0);
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k <= i; ++k) y[i] += chol_[static_cast<std::size_t>(i) * dim_ + k] * z[k];
    return y;
}

std::string NoiseModel::kind_name() const {
    switch (kind_) {
        case Kind::gaussian: return "gaussian";
        case Kind::gaussian_mixture: return "gaussian_mixture";
        default: return "compact_support";
    }
}

NoiseAuditReport audit_noise(const NoiseModel& nm, double radius, int resolution) {
    require(radius > 0.0 && resolution >= 8, "audit_noise: bad grid");
    const int d = nm.dim();
    NoiseAuditReport rep;

    // Direction set: +-axes plus hashed unit directions, mapped through the
    // Gamma factor so radii are Gamma-radii.
    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        dirs.push_back(e);
        e[i] = -1.0;
        dirs.push_back(e);
    }
    RngStream rng(0x5eedu, 17);
    for (int extra = 0; extra < 8; ++extra) {
        std::vector<double> e(d);
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            e[i] = rng.normal();
            n2 += e[i] * e[i];
        }
        if (n2 == 0.0) continue;
        for (double& v : e) v /= std::sqrt(n2);
        dirs.push_back(e);
    }
    const auto L = cholesky(nm.gamma(), d);
    auto point_at = [&](const std::vector<double>& e, double r) {
        std::vector<double> y(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k <= i; ++k)
                y[i] += L[static_cast<std::size_t>(i) * d + k] * e[k] * r;
        return y;
    };

    rep.tail_min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& e : dirs) {
        double prev_rho = 0.0;
        for (int s = 0; s <= resolution; ++s) {
            const double r = radius * static_cast<double>(s) / resolution;
            const std::vector<double> y = point_at(e, r);
            const double rho = nm.density(y);
            rep.sup_density = std::max(rep.sup_density, rho);
            const double q = nm.gamma_norm(y);
            rep.tail_min_ratio = std::min(rep.tail_min_ratio, rho * std::exp(0.5 * q * q));
            if (s > 0) {
                const double dr = radius / resolution;  // Gamma-norm spacing along the ray
                rep.lipschitz_estimate =
                    std::max(rep.lipschitz_estimate, std::abs(rho - prev_rho) / dr);
            }
            prev_rho = rho;
        }
    }
    rep.c_rho = std::max(0.0, std::log(rep.sup_density));
    rep.b_rho = rep.tail_min_ratio > 0.0 ? -std::log(rep.tail_min_ratio)
                                         : std::numeric_limits<double>::infinity();
    rep.regularity_pass = std::isfinite(rep.lipschitz_estimate);
    rep.boundedness_pass = std::isfinite(rep.sup_density);
    rep.tail_pass = rep.tail_min_ratio > 0.0 && std::isfinite(rep.b_rho);
    return rep;
}

}  // namespace dalab
