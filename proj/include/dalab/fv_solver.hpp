#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dalab/common.hpp"
#include "dalab/property_report.hpp"

namespace dalab {

/// Periodic cell averages on [0,2pi], equidistant mesh.
struct CellField {
    std::vector<double> values;

    std::size_t n_cells() const { return values.size(); }
    double delta() const { return two_pi / static_cast<double>(values.size()); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const;
};

/// Discrete L2 norm sqrt(Delta * sum u_i^2) (the norm of the piecewise
/// constant reconstruction).
double l2_norm(const CellField& u);
double l2_distance(const CellField& a, const CellField& b);

/// Total entropy Delta * sum eta(u_i) with eta(u) = u^2/2.
double entropy(const CellField& u);
double total_mass(const CellField& u);

enum class FluxKind { rusanov, godunov };

FluxKind flux_from_string(const std::string& s);
std::string to_string(FluxKind k);

/// First-order finite-volume scheme for Burgers f(u) = u^2/2 on the periodic
/// mesh, semidiscrete flux-difference form advanced with SSP-RK2.
struct FVConfig {
    std::size_t n_cells = 0;
    double dt = 0.0;
    double t_end = 0.0;
    FluxKind flux = FluxKind::rusanov;
    double cfl_limit = 0.9;

    void validate() const {
        require(n_cells >= 4, "FVConfig: need at least 4 cells");
        require(dt > 0.0 && t_end > 0.0, "FVConfig: dt and t_end must be positive");
        double steps = t_end / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw ConfigError("FVConfig: t_end must be an integer number of steps");
    }
    std::size_t n_steps() const { return static_cast<std::size_t>(std::round(t_end / dt)); }
    double delta() const { return two_pi / static_cast<double>(n_cells); }
};

struct FVTrajectory {
    std::vector<double> times;
    std::vector<CellField> states;
    std::size_t size() const { return times.size(); }
    std::size_t nearest(double t) const;
};

/// Numerical flux F(a,b) for Burgers.
double numerical_flux(FluxKind kind, double a, double b);

/// One SSP-RK2 step; throws ConfigError on CFL violation and BlowUpError on
/// non-finite output.
CellField fv_step(const CellField& state, const FVConfig& cfg);

class FvSolver {
  public:
    explicit FvSolver(FVConfig cfg) : cfg_(cfg) { cfg_.validate(); }
    const FVConfig& config() const { return cfg_; }

    CellField advance(const CellField& state, std::size_t n, std::size_t step0,
                      const std::function<void(std::size_t, const CellField&)>& on_step =
                          nullptr) const;

    FVTrajectory solve(const CellField& u0, const std::vector<double>& snapshot_times) const;

  private:
    FVConfig cfg_;
};

/// Cell-midpoint sampling of pointwise initial data.
CellField sample_cells(std::size_t n_cells, const std::function<double(double)>& u0);

/// Discrete L2 stays within (1+1e-10) of the initial value at every time.
PropertyReport verify_l2_bound(const FVTrajectory& traj);

/// Weak BV estimate: lhs = Delta * int_0^T sum_i |u_{i+1}-u_i|^s dt; the
/// report records lhs/Delta (the constant estimate); pass means finite.
/// Uniformity across a mesh sweep is checked by the experiment layer.
PropertyReport verify_weak_bv(const FVTrajectory& traj, double s);

struct FluxConsistencyReport {
    double fitted_constant = 0.0;   // max residual / |a-b| over the sample
    double diagonal_residual = 0.0; // max |F(c,c) - f(c)|
    bool pass = false;
};

/// Samples (a,b) pairs over [lo,hi]^2 and fits the consistency constant.
FluxConsistencyReport flux_consistency_check(FluxKind kind, double lo, double hi,
                                             std::size_t n_samples = 64);

}  // namespace dalab
