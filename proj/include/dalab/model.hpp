#pragma once

#include <vector>

#include "dalab/fv_solver.hpp"
#include "dalab/ns_solver.hpp"
#include "dalab/observable.hpp"

namespace dalab {

/// Uniform forward-model interface used by the filtering and experiment
/// layers: a state type, segment solves on [t0,t1] with snapshots at
/// step-aligned times, norms/distances, and observable evaluation.

class NsModel {
  public:
    using State = SpectralField;
    using Traj = Trajectory;

    explicit NsModel(NSConfig cfg) : solver_(cfg) {}

    const NSConfig& config() const { return solver_.config(); }
    double dt() const { return solver_.config().dt; }
    double t_end() const { return solver_.config().t_end; }

    State prepare_initial(const State& u) const { return solver_.prepare_initial(u); }

    /// Integrate from `state` at t0 to t1, capturing snapshots at the given
    /// absolute times (t0 and t1 always included). Restarting from a stored
    /// state reproduces the long solve bit-for-bit (exact semigroup on step
    /// boundaries), which the recursive/one-shot equivalence tests rely on.
    Traj segment(const State& state, double t0, double t1,
                 const std::vector<double>& snap_times) const {
        const double dt = solver_.config().dt;
        const std::size_t s0 = time_to_step(t0, dt);
        const std::size_t s1 = time_to_step(t1, dt);
        require(s1 > s0, "segment: empty time interval");
        std::vector<std::size_t> steps;
        steps.push_back(s0);
        for (double t : snap_times) {
            std::size_t k = time_to_step(t, dt);
            require(k >= s0 && k <= s1, "segment: snapshot outside interval");
            if (k != s0 && (steps.empty() || k != steps.back())) steps.push_back(k);
        }
        if (steps.back() != s1) steps.push_back(s1);
        for (std::size_t i = 1; i < steps.size(); ++i)
            require(steps[i] > steps[i - 1], "segment: snapshot times must increase");

        Traj traj;
        traj.times.push_back(static_cast<double>(s0) * dt);
        traj.states.push_back(state);
        std::size_t want = 1;
        solver_.advance(state, s1 - s0, s0, [&](std::size_t local, const State& s) {
            if (want < steps.size() && s0 + local == steps[want]) {
                traj.times.push_back(static_cast<double>(steps[want]) * dt);
                traj.states.push_back(s);
                ++want;
            }
        });
        return traj;
    }

    static double norm(const State& u) { return l2_norm(u); }
    static double distance(const State& a, const State& b) { return l2_distance(a, b); }
    static int space_dim() { return 2; }

    std::vector<double> observe(const Observable& obs, const Traj& traj) const {
        return evaluate(obs, traj);
    }

  private:
    NsSolver solver_;
};

class BurgersModel {
  public:
    using State = CellField;
    using Traj = FVTrajectory;

    explicit BurgersModel(FVConfig cfg) : solver_(cfg) {}

    const FVConfig& config() const { return solver_.config(); }
    double dt() const { return solver_.config().dt; }
    double t_end() const { return solver_.config().t_end; }

    State prepare_initial(const State& u) const {
        require(u.n_cells() == solver_.config().n_cells, "prepare_initial: mesh mismatch");
        return u;
    }

    Traj segment(const State& state, double t0, double t1,
                 const std::vector<double>& snap_times) const {
        const double dt = solver_.config().dt;
        const std::size_t s0 = time_to_step(t0, dt);
        const std::size_t s1 = time_to_step(t1, dt);
        require(s1 > s0, "segment: empty time interval");
        std::vector<std::size_t> steps;
        steps.push_back(s0);
        for (double t : snap_times) {
            std::size_t k = time_to_step(t, dt);
            require(k >= s0 && k <= s1, "segment: snapshot outside interval");
            if (k != s0 && (steps.empty() || k != steps.back())) steps.push_back(k);
        }
        if (steps.back() != s1) steps.push_back(s1);

        Traj traj;
        traj.times.push_back(static_cast<double>(s0) * dt);
        traj.states.push_back(state);
        std::size_t want = 1;
        solver_.advance(state, s1 - s0, s0, [&](std::size_t local, const State& s) {
            if (want < steps.size() && s0 + local == steps[want]) {
                traj.times.push_back(static_cast<double>(steps[want]) * dt);
                traj.states.push_back(s);
                ++want;
            }
        });
        return traj;
    }

    static double norm(const State& u) { return l2_norm(u); }
    static double distance(const State& a, const State& b) { return l2_distance(a, b); }
    static int space_dim() { return 1; }

    std::vector<double> observe(const Observable& obs, const Traj& traj) const {
        return evaluate(obs, traj);
    }

  private:
    FvSolver solver_;
};

}  // namespace dalab
