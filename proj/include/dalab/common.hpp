#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dalab {

using complexd = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Thrown when a solver produces non-finite coefficients. Diverging runs are
/// expected behaviour for the models studied here, so the error carries
/// enough context to report where the run died.
struct BlowUpError : std::runtime_error {
    std::size_t step_index;
    double time;
    BlowUpError(std::size_t step, double t)
        : std::runtime_error("solution blew up at step " + std::to_string(step) +
                             ", t = " + std::to_string(t)),
          step_index(step), time(t) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// All importance weights collapsed to -inf: the measurement is incompatible
/// with every ensemble member.
struct DegeneratePosteriorError : std::runtime_error {
    explicit DegeneratePosteriorError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// log(sum_i exp(x_i)) without overflow; -inf for an all--inf input.
inline double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

/// Map a time to a step index on a uniform grid, requiring near-exact
/// alignment (|t - k*dt| <= tol). Misaligned times are configuration errors.
inline std::size_t time_to_step(double t, double dt, double tol = 1e-9) {
    double k = std::round(t / dt);
    if (k < 0 || std::abs(k * dt - t) > tol)
        throw ConfigError("time " + std::to_string(t) + " is not a multiple of dt = " +
                          std::to_string(dt));
    return static_cast<std::size_t>(k);
}

}  // namespace dalab
