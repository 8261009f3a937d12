#include "dalab/observable.hpp"

#include <algorithm>
#include <cmath>

#include "dalab/fft.hpp"

namespace dalab {

PointwiseMap pointwise_map_from_string(const std::string& s) {
    if (s == "identity") return PointwiseMap::identity;
    if (s == "component") return PointwiseMap::component;
    if (s == "sigmoid_energy") return PointwiseMap::sigmoid_energy;
    throw ConfigError("unknown pointwise map: " + s);
}

std::string to_string(PointwiseMap g) {
    switch (g) {
        case PointwiseMap::identity: return "identity";
        case PointwiseMap::component: return "component";
        default: return "sigmoid_energy";
    }
}

double pointwise_lipschitz(PointwiseMap g) {
    if (g != PointwiseMap::sigmoid_energy) return 1.0;
    // |grad tanh(|u|^2)| = 2|u| sech^2(|u|^2); maximize over s = |u|^2.
    static const double lip = [] {
        double best = 0.0;
        for (int i = 1; i <= 40000; ++i) {
            const double s = 1e-4 * i;
            const double c = std::cosh(s);
            best = std::max(best, 2.0 * std::sqrt(s) / (c * c));
        }
        return best;
    }();
    return lip;
}

double lipschitz_estimate(const Observable& obs, int space_dim) {
    const double measure_root = std::pow(two_pi, 0.5 * space_dim);
    return obs.phi.sup_norm() * pointwise_lipschitz(obs.map) * measure_root;
}

namespace {

/// Snapshot indices covering the window; endpoints must be present.
template <class Traj>
std::pair<std::size_t, std::size_t> window_range(const Observable& obs, const Traj& traj) {
    const double tol = 1e-9;
    std::size_t lo = traj.times.size(), hi = traj.times.size();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (lo == traj.times.size() && traj.times[i] >= obs.t_begin - tol) lo = i;
        if (traj.times[i] <= obs.t_end + tol) hi = i;
    }
    require(lo < traj.times.size() && hi < traj.times.size() && lo < hi,
            "evaluate: trajectory does not cover the observation window");
    require(std::abs(traj.times[lo] - obs.t_begin) <= tol &&
                std::abs(traj.times[hi] - obs.t_end) <= tol,
            "evaluate: window endpoints missing from the trajectory");
    return {lo, hi};
}

void accumulate_spatial(const Observable& obs, const PhysicalField& p,
                        std::vector<double>& out) {
    const int m = p.m;
    const double cell = (two_pi / m) * (two_pi / m);
    if (obs.map == PointwiseMap::identity) {
        for (int c = 0; c < SpectralField::n_components; ++c) {
            double acc = 0.0;
            for (int ix = 0; ix < m; ++ix) {
                const double x = two_pi * ix / m;
                for (int iy = 0; iy < m; ++iy)
                    acc += obs.phi.eval(x, two_pi * iy / m) * p.at(c, ix, iy);
            }
            out[c] = acc * cell;
        }
        return;
    }
    double acc = 0.0;
    for (int ix = 0; ix < m; ++ix) {
        const double x = two_pi * ix / m;
        for (int iy = 0; iy < m; ++iy) {
            const double w = obs.phi.eval(x, two_pi * iy / m);
            if (obs.map == PointwiseMap::component) {
                acc += w * p.at(obs.component, ix, iy);
            } else {
                const double u1 = p.at(0, ix, iy);
                const double u2 = p.at(1, ix, iy);
                acc += w * std::tanh(u1 * u1 + u2 * u2);
            }
        }
    }
    out[0] = acc * cell;
}

}  // namespace

std::vector<double> evaluate(const Observable& obs, const Trajectory& traj) {
    obs.validate();
    auto [lo, hi] = window_range(obs, traj);
    const int d = obs.output_dim(SpectralField::n_components);
    const int n_modes = traj.states[0].grid().n_modes;
    const int mq = obs.quad_resolution > 0 ? obs.quad_resolution : 4 * n_modes;

    std::vector<double> result(d, 0.0);
    std::vector<double> spatial(d, 0.0);
    std::vector<double> prev(d, 0.0);
    for (std::size_t i = lo; i <= hi; ++i) {
        PhysicalField p = to_physical(traj.states[i], mq);
        accumulate_spatial(obs, p, spatial);
        if (i > lo) {
            const double h = traj.times[i] - traj.times[i - 1];
            for (int c = 0; c < d; ++c) result[c] += 0.5 * h * (prev[c] + spatial[c]);
        }
        prev = spatial;
    }
    return result;
}

std::vector<double> evaluate(const Observable& obs, const FVTrajectory& traj) {
    obs.validate();
    auto [lo, hi] = window_range(obs, traj);
    require(obs.map != PointwiseMap::component || obs.component == 0,
            "evaluate: scalar field has a single component");

    auto spatial = [&](const CellField& u) {
        const double delta = u.delta();
        double acc = 0.0;
        for (std::size_t i = 0; i < u.n_cells(); ++i) {
            const double x = (static_cast<double>(i) + 0.5) * delta;
            const double w = obs.phi.eval(x, 0.0);
            const double v = obs.map == PointwiseMap::sigmoid_energy
                                 ? std::tanh(u[i] * u[i])
                                 : u[i];
            acc += w * v;
        }
        return acc * delta;
    };

    std::vector<double> result(1, 0.0);
    double prev = spatial(traj.states[lo]);
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        const double cur = spatial(traj.states[i]);
        result[0] += 0.5 * (traj.times[i] - traj.times[i - 1]) * (prev + cur);
        prev = cur;
    }
    return result;
}

std::vector<Observable> tile_windows(std::size_t n_stages, double t_end,
                                     const Observable& proto) {
    require(n_stages >= 1, "tile_windows: need at least one stage");
    std::vector<Observable> out(n_stages, proto);
    const double h = t_end / static_cast<double>(n_stages);
    for (std::size_t j = 0; j < n_stages; ++j) {
        out[j].t_begin = h * static_cast<double>(j);
        out[j].t_end = h * static_cast<double>(j + 1);
    }
    return out;
}

}  // namespace dalab
