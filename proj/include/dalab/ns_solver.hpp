#pragma once

#include <functional>
#include <vector>

#include "dalab/common.hpp"
#include "dalab/grid.hpp"
#include "dalab/property_report.hpp"
#include "dalab/spectral_field.hpp"
#include "dalab/trajectory.hpp"

namespace dalab {

/// Spectral Galerkin discretization of 2D incompressible Navier-Stokes:
/// viscous term integrated exactly (integrating factor), nonlinear term
/// advanced with RK4 and evaluated pseudo-spectrally on a 4N grid, which is
/// alias-free for the retained band |k|_inf <= N.
struct NSConfig {
    double viscosity = 0.0;
    Grid2 grid;
    double dt = 0.0;
    double t_end = 0.0;

    void validate() const {
        require(viscosity > 0.0, "NSConfig: viscosity must be positive");
        require(dt > 0.0 && t_end > 0.0, "NSConfig: dt and t_end must be positive");
        double steps = t_end / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw ConfigError("NSConfig: t_end must be an integer number of steps");
    }

    std::size_t n_steps() const { return static_cast<std::size_t>(std::round(t_end / dt)); }

    /// Advective CFL ceiling 0.5 / (N * max|u|_inf), evaluated on a field.
    double dt_ceiling(const SpectralField& u0) const;
};

class NsSolver {
  public:
    explicit NsSolver(NSConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const NSConfig& config() const { return cfg_; }

    /// P_N truncation onto the solver grid followed by Leray projection;
    /// realizes the scheme's initial condition u|_{t=0} = P_N u0.
    SpectralField prepare_initial(const SpectralField& u0) const;

    /// One time step. state must live on cfg.grid and be divergence-free.
    SpectralField step(const SpectralField& state) const;

    /// Advance n steps from `state` (clock origin step0 for error reports),
    /// invoking on_step(step_index_local, state_after) after each step.
    SpectralField advance(const SpectralField& state, std::size_t n, std::size_t step0,
                          const std::function<void(std::size_t, const SpectralField&)>&
                              on_step = nullptr) const;

    /// Full solve with snapshots at the requested times (each a multiple of
    /// dt within [0, t_end]; t = 0 is always included).
    Trajectory solve(const SpectralField& u0, const std::vector<double>& snapshot_times) const;

  private:
    NSConfig cfg_;
};

inline Trajectory ns_solve(const SpectralField& u0, const NSConfig& cfg,
                           const std::vector<double>& snapshot_times) {
    return NsSolver(cfg).solve(u0, snapshot_times);
}

inline SpectralField ns_step(const SpectralField& state, const NSConfig& cfg) {
    return NsSolver(cfg).step(state);
}

/// Energy bound (max_t ||u(t)|| vs ||u(0)||, relative tolerance 1e-8).
PropertyReport verify_energy(const Trajectory& traj);

/// Coercivity: trapezoid enstrophy integral vs nu^{-1}||u(0)||^2, 1% slack.
/// Requires at least 64 uniformly spaced snapshots.
PropertyReport verify_coercivity(const Trajectory& traj, double viscosity);

/// Weak time-regularity: max over snapshot pairs of the H^{-L} difference
/// quotient. Pass means the quotient is finite; uniformity across
/// refinements is checked by the experiment layer.
PropertyReport verify_time_regularity(const Trajectory& traj, double L);

/// Copy the overlapping coefficient band onto another truncation (P_N when
/// shrinking, zero-extension when growing).
SpectralField resample_to(const SpectralField& field, Grid2 target);

/// L2 distance between fields on possibly different truncations, evaluated
/// on the union band.
double l2_distance_band(const SpectralField& a, const SpectralField& b);

/// Named reference fields on [0,2pi]^2.
SpectralField taylor_green(Grid2 grid);            // (sin x cos y, -cos x sin y)
SpectralField shear_mode(Grid2 grid);              // (sin y, 0)
double taylor_green_decay(double viscosity, double t);  // exp(-2 nu t)

}  // namespace dalab
