#pragma once

#include <string>
#include <vector>

#include "dalab/common.hpp"
#include "dalab/rng.hpp"

namespace dalab {

/// Measurement-noise density on R^d with covariance-like matrix Gamma.
/// gaussian: N(0, Gamma). gaussian_mixture: p N(0,Gamma) + (1-p) N(0,k^2 Gamma),
/// kappa > 1, a heavy-tail model that still meets the tail condition with a
/// computable constant. compact_support: c (1 - |y|_Gamma^2)_+, a test
/// fixture that violates strict positivity.
class NoiseModel {
  public:
    enum class Kind { gaussian, gaussian_mixture, compact_support };

    NoiseModel() = default;
    NoiseModel(Kind kind, std::vector<double> gamma, int dim, double mixture_weight = 0.5,
               double kappa = 3.0);

    static NoiseModel gaussian(std::vector<double> gamma, int dim) {
        return NoiseModel(Kind::gaussian, std::move(gamma), dim);
    }
    static NoiseModel heavy_tail(std::vector<double> gamma, int dim, double p, double kappa) {
        return NoiseModel(Kind::gaussian_mixture, std::move(gamma), dim, p, kappa);
    }
    static NoiseModel compact_fixture(std::vector<double> gamma, int dim) {
        return NoiseModel(Kind::compact_support, std::move(gamma), dim);
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<double>& gamma() const { return gamma_; }
    double mixture_weight() const { return mixture_weight_; }
    double kappa() const { return kappa_; }

    /// |y|_Gamma = sqrt(y^T Gamma^{-1} y).
    double gamma_norm(const std::vector<double>& y) const;

    /// log rho(y); -inf outside the support of the compact fixture.
    double log_density(const std::vector<double>& y) const;
    double density(const std::vector<double>& y) const { return std::exp(log_density(y)); }

    std::vector<double> sample(RngStream& rng) const;

    std::string kind_name() const;

  private:
    Kind kind_ = Kind::gaussian;
    int dim_ = 1;
    std::vector<double> gamma_;      // row-major d x d
    std::vector<double> chol_;       // lower-triangular factor of gamma
    double log_det_gamma_ = 0.0;
    double mixture_weight_ = 0.5;
    double kappa_ = 3.0;
};

/// Audit of the noise conditions: Lipschitz regularity of rho in the Gamma
/// norm (sampled finite differences), boundedness, and the Gaussian-tail
/// lower bound (min over the grid of rho(y) exp(|y|_Gamma^2 / 2)).
struct NoiseAuditReport {
    double lipschitz_estimate = 0.0;  // L_rho
    double sup_density = 0.0;
    double c_rho = 0.0;               // max(0, log sup rho), lower bound on Phi is -c_rho
    double tail_min_ratio = 0.0;      // min rho(y) e^{|y|^2_Gamma/2}
    double b_rho = 0.0;               // -log(tail_min_ratio); Phi <= B_rho + |y-L|^2/2
    bool regularity_pass = false;     // (N.1)
    bool boundedness_pass = false;    // (N.2)
    bool tail_pass = false;           // (N.3)
    bool all_pass() const { return regularity_pass && boundedness_pass && tail_pass; }
};

/// Samples rho along hashed unit directions out to Gamma-radius R with the
/// given radial resolution.
NoiseAuditReport audit_noise(const NoiseModel& nm, double radius, int resolution);

/// Lower-triangular Cholesky factor of a row-major SPD matrix; throws
/// ConfigError when the matrix is not SPD.
std::vector<double> cholesky(const std::vector<double>& matrix, int dim);

std::vector<double> identity_matrix(int dim);
std::vector<double> diagonal_matrix(const std::vector<double>& diag);

}  // namespace dalab
