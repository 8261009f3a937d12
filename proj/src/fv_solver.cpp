#include "dalab/fv_solver.hpp"

#include <algorithm>
#include <cmath>

namespace dalab {

namespace {

inline double burgers_flux(double u) { return 0.5 * u * u; }

void semidiscrete_rhs(const CellField& u, FluxKind kind, std::vector<double>& rhs) {
    const std::size_t n = u.n_cells();
    const double inv_delta = 1.0 / u.delta();
    rhs.resize(n);
    // F_{i+1/2} = F(u_i, u_{i+1}) with periodic wrap.
    double f_left = numerical_flux(kind, u[n - 1], u[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double f_right = numerical_flux(kind, u[i], u[(i + 1) % n]);
        rhs[i] = -(f_right - f_left) * inv_delta;
        f_left = f_right;
    }
}

void check_cfl(const CellField& u, const FVConfig& cfg) {
    double umax = 0.0;
    for (double v : u.values) umax = std::max(umax, std::abs(v));
    if (cfg.dt * umax / cfg.delta() > cfg.cfl_limit)
        throw ConfigError("FVConfig: CFL violation, dt*max|f'(u)|/Delta > " +
                          std::to_string(cfg.cfl_limit));
}

CellField ssp_rk2(const CellField& u, const FVConfig& cfg, std::vector<double>& rhs) {
    check_cfl(u, cfg);
    const std::size_t n = u.n_cells();
    CellField star;
    star.values.resize(n);
    semidiscrete_rhs(u, cfg.flux, rhs);
    for (std::size_t i = 0; i < n; ++i) star.values[i] = u[i] + cfg.dt * rhs[i];
    semidiscrete_rhs(star, cfg.flux, rhs);
    CellField out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = 0.5 * (u[i] + star.values[i] + cfg.dt * rhs[i]);
    return out;
}

}  // namespace

bool CellField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

double l2_norm(const CellField& u) {
    double s = 0.0;
    for (double v : u.values) s += v * v;
    return std::sqrt(u.delta() * s);
}

double l2_distance(const CellField& a, const CellField& b) {
    require(a.n_cells() == b.n_cells(), "CellField distance: mesh mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.n_cells(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(a.delta() * s);
}

double entropy(const CellField& u) {
    double s = 0.0;
    for (double v : u.values) s += 0.5 * v * v;
    return u.delta() * s;
}

double total_mass(const CellField& u) {
    double s = 0.0;
    for (double v : u.values) s += v;
    return u.delta() * s;
}

FluxKind flux_from_string(const std::string& s) {
    if (s == "rusanov") return FluxKind::rusanov;
    if (s == "godunov") return FluxKind::godunov;
    throw ConfigError("unknown flux: " + s);
}

std::string to_string(FluxKind k) { return k == FluxKind::rusanov ? "rusanov" : "godunov"; }

double numerical_flux(FluxKind kind, double a, double b) {
    if (kind == FluxKind::rusanov) {
        const double s = std::max(std::abs(a), std::abs(b));
        return 0.5 * (burgers_flux(a) + burgers_flux(b)) - 0.5 * s * (b - a);
    }
    // Godunov flux for the convex flux u^2/2.
    if (a <= b) {
        if (a <= 0.0 && 0.0 <= b) return 0.0;
        return std::min(burgers_flux(a), burgers_flux(b));
    }
    return std::max(burgers_flux(a), burgers_flux(b));
}

std::size_t FVTrajectory::nearest(double t) const {
    std::size_t best = 0;
    double d = std::abs(times[0] - t);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double di = std::abs(times[i] - t);
        if (di < d) {
            d = di;
            best = i;
        }
    }
    return best;
}

CellField fv_step(const CellField& state, const FVConfig& cfg) {
    std::vector<double> rhs;
    CellField out = ssp_rk2(state, cfg, rhs);
    if (!out.all_finite()) throw BlowUpError(1, cfg.dt);
    return out;
}

CellField FvSolver::advance(
    const CellField& state, std::size_t n, std::size_t step0,
    const std::function<void(std::size_t, const CellField&)>& on_step) const {
    require(state.n_cells() == cfg_.n_cells, "advance: mesh mismatch");
    std::vector<double> rhs;
    CellField cur = state;
    for (std::size_t i = 0; i < n; ++i) {
        cur = ssp_rk2(cur, cfg_, rhs);
        if (!cur.all_finite())
            throw BlowUpError(step0 + i + 1, static_cast<double>(step0 + i + 1) * cfg_.dt);
        if (on_step) on_step(i + 1, cur);
    }
    return cur;
}

FVTrajectory FvSolver::solve(const CellField& u0,
                             const std::vector<double>& snapshot_times) const {
    require(u0.n_cells() == cfg_.n_cells, "fv_solve: mesh mismatch");
    const std::size_t n_steps = cfg_.n_steps();
    std::vector<std::size_t> snap_steps;
    snap_steps.push_back(0);
    for (double t : snapshot_times) {
        std::size_t k = time_to_step(t, cfg_.dt);
        require(k <= n_steps, "fv_solve: snapshot time beyond t_end");
        if (k != 0) snap_steps.push_back(k);
    }
    for (std::size_t i = 1; i < snap_steps.size(); ++i)
        require(snap_steps[i] > snap_steps[i - 1],
                "fv_solve: snapshot times must be strictly increasing");

    FVTrajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    std::size_t want = 1;
    advance(u0, n_steps, 0, [&](std::size_t step, const CellField& s) {
        if (want < snap_steps.size() && step == snap_steps[want]) {
            traj.times.push_back(static_cast<double>(step) * cfg_.dt);
            traj.states.push_back(s);
            ++want;
        }
    });
    return traj;
}

CellField sample_cells(std::size_t n_cells, const std::function<double(double)>& u0) {
    CellField u;
    u.values.resize(n_cells);
    const double delta = two_pi / static_cast<double>(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i)
        u.values[i] = u0((static_cast<double>(i) + 0.5) * delta);
    return u;
}

PropertyReport verify_l2_bound(const FVTrajectory& traj) {
    const double e0 = l2_norm(traj.states.front());
    double emax = 0.0;
    for (const auto& s : traj.states) emax = std::max(emax, l2_norm(s));
    return PropertyReport::check("fv_l2_bound", emax, e0, 1e-10);
}

PropertyReport verify_weak_bv(const FVTrajectory& traj, double s) {
    require(s >= 2.0, "verify_weak_bv: s must be >= 2");
    require(traj.size() >= 2, "verify_weak_bv: need snapshots dense in time");
    const double delta = traj.states.front().delta();
    auto increment_sum = [&](const CellField& u) {
        const std::size_t n = u.n_cells();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += std::pow(std::abs(u[(i + 1) % n] - u[i]), s);
        return acc;
    };
    double integral = 0.0;
    double prev = increment_sum(traj.states[0]);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double cur = increment_sum(traj.states[i]);
        integral += 0.5 * (prev + cur) * (traj.times[i] - traj.times[i - 1]);
        prev = cur;
    }
    const double lhs = delta * integral;
    PropertyReport r = PropertyReport::check("fv_weak_bv", lhs / delta, lhs / delta, 0.0);
    return r;
}

FluxConsistencyReport flux_consistency_check(FluxKind kind, double lo, double hi,
                                             std::size_t n_samples) {
    FluxConsistencyReport rep;
    const double h = (hi - lo) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double a = lo + h * static_cast<double>(i);
        rep.diagonal_residual =
            std::max(rep.diagonal_residual, std::abs(numerical_flux(kind, a, a) - burgers_flux(a)));
        for (std::size_t j = 0; j < n_samples; ++j) {
            if (i == j) continue;
            const double b = lo + h * static_cast<double>(j);
            const double resid = std::abs(numerical_flux(kind, a, b) - burgers_flux(a));
            rep.fitted_constant = std::max(rep.fitted_constant, resid / std::abs(a - b));
        }
    }
    rep.pass = std::isfinite(rep.fitted_constant) && rep.diagonal_residual == 0.0;
    return rep;
}

}  // namespace dalab
