#pragma once

#include <string>
#include <vector>

#include "dalab/common.hpp"
#include "dalab/fv_solver.hpp"
#include "dalab/trajectory.hpp"

namespace dalab {

/// Bounded spatial weight phi. "constant" is phi == value; "cosine" is
/// value*cos(ax+by) (b ignored in 1D). Either way ||phi||_inf = |value|.
struct SpatialWeight {
    enum class Kind { constant, cosine };
    Kind kind = Kind::constant;
    double value = 1.0;
    double ax = 1.0;
    double ay = 0.0;

    double eval(double x, double y) const {
        return kind == Kind::constant ? value : value * std::cos(ax * x + ay * y);
    }
    double sup_norm() const { return std::abs(value); }
};

/// Pointwise map g applied to the state values. identity returns the full
/// state vector (d_obs = space components); component picks one entry;
/// sigmoid_energy is tanh(|u|^2), bounded with finite Lipschitz constant.
enum class PointwiseMap { identity, component, sigmoid_energy };

PointwiseMap pointwise_map_from_string(const std::string& s);
std::string to_string(PointwiseMap g);

/// Eulerian window observable G(u) = int_{t0}^{t1} int_D phi(x) g(u(x,t)) dx dt,
/// evaluated by trapezoid in time over stored snapshots and a uniform spatial
/// grid at the solver's alias-free resolution.
struct Observable {
    double t_begin = 0.0;
    double t_end = 0.0;
    SpatialWeight phi;
    PointwiseMap map = PointwiseMap::identity;
    int component = 0;
    int quad_resolution = 0;  // 0 -> 4N for spectral fields, mesh itself for cells

    void validate() const {
        require(t_begin < t_end, "Observable: window must have positive length");
    }

    int output_dim(int state_components) const {
        return map == PointwiseMap::identity ? state_components : 1;
    }
};

/// Global Lipschitz constant of the pointwise map (1 for identity/component;
/// max_s 2 sqrt(s) sech^2(s) for the sigmoid).
double pointwise_lipschitz(PointwiseMap g);

/// Analytic bound L_G = ||phi||_inf * Lip(g) * |D|^{1/2} from Cauchy-Schwarz,
/// certifying |G(u)-G(u')| <= L_G int ||u-u'||_{L2} dt. space_dim is 2 for
/// the torus fields (|D|^{1/2} = 2pi) and 1 for cell fields (sqrt(2pi)).
double lipschitz_estimate(const Observable& obs, int space_dim);

/// Quadrature of the window functional over a spectral trajectory.
std::vector<double> evaluate(const Observable& obs, const Trajectory& traj);

/// Same over a finite-volume trajectory (piecewise-constant reconstruction).
std::vector<double> evaluate(const Observable& obs, const FVTrajectory& traj);

/// Measurement windows tiling [0, t_end]: stage j gets [(j-1)h, jh].
std::vector<Observable> tile_windows(std::size_t n_stages, double t_end, const Observable& proto);

}  // namespace dalab
