#include "dalab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dalab/fft.hpp"

namespace dalab {

namespace {

/// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(two_pi / 2.0 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], mirrored
        weights[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

struct GaussRule {
    std::vector<double> nodes, weights;
    explicit GaussRule(int n) { gauss_legendre(n, nodes, weights); }
};

const GaussRule& radial_rule() {
    static const GaussRule rule(32);
    return rule;
}

constexpr int kAngular = 64;

}  // namespace

double disk_multiplier(double k_abs, double r) {
    if (k_abs == 0.0) return 0.0;
    // avg_{B_r} cos(k.h) dh = (2/r^2) int_0^r J0(|k| rho) rho d rho. The
    // base rule is 32-point Gauss-Legendre radial x 64-point periodic
    // trapezoid angular; both refine with |k| r so the oscillatory
    // integrand stays resolved for every mode of the truncation.
    const auto& xs = radial_rule().nodes;
    const auto& ws = radial_rule().weights;
    const double xi = k_abs * r;
    const int panels = std::max(1, static_cast<int>(std::ceil(xi / 16.0)));
    const int n_ang = kAngular + 2 * (static_cast<int>(std::ceil(xi / 2.0)) & ~1);
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = r * p / panels;
        const double width = r / panels;
        for (std::size_t q = 0; q < xs.size(); ++q) {
            const double rho = lo + width * xs[q];
            double ang = 0.0;
            for (int a = 0; a < n_ang; ++a) {
                const double phi = two_pi * a / n_ang;
                ang += std::cos(k_abs * rho * std::cos(phi));
            }
            ang /= n_ang;
            acc += ws[q] * ang * rho * width;
        }
    }
    const double avg_cos = 2.0 / (r * r) * acc;
    return 2.0 - 2.0 * avg_cos;
}

std::vector<double> multiplier_table(int n_modes, double r) {
    const int k2max = 2 * n_modes * n_modes;
    std::vector<double> table(static_cast<std::size_t>(k2max) + 1,
                              std::numeric_limits<double>::quiet_NaN());
    table[0] = 0.0;
    for (int kx = 0; kx <= n_modes; ++kx)
        for (int ky = 0; ky <= n_modes; ++ky) {
            const int k2 = kx * kx + ky * ky;
            if (k2 > 0 && std::isnan(table[k2]))
                table[k2] = disk_multiplier(std::sqrt(double(k2)), r);
        }
    return table;
}

double structure_s2(const SpectralField& u, const std::vector<double>& table) {
    const int n = u.grid().n_modes;
    double acc = 0.0;
    for (int c = 0; c < SpectralField::n_components; ++c)
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky) {
                const int k2 = kx * kx + ky * ky;
                if (k2 == 0) continue;
                acc += table[k2] * std::norm(u.at(c, kx, ky));
            }
    return two_pi * std::sqrt(acc);
}

double structure_s2(const SpectralField& u, double r) {
    return structure_s2(u, multiplier_table(u.grid().n_modes, r));
}

double structure_s2(const CellField& u, double r) {
    const std::size_t n = u.n_cells();
    const double delta = u.delta();
    require(r > 0.0 && r <= two_pi / 2.0, "structure_s2: radius outside (0, pi]");
    const std::size_t m_full = static_cast<std::size_t>(std::floor(r / delta));
    require(m_full + 1 < n, "structure_s2: radius too large for the mesh");

    auto q_shift = [&](std::size_t m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = u[(i + m) % n] - u[i];
            acc += d * d;
        }
        return acc;
    };

    std::vector<double> q(m_full + 2);
    for (std::size_t m = 0; m <= m_full + 1; ++m) q[m] = q_shift(m);

    // D(h) = (Delta - s) Q_m + s Q_{m+1} for h = m Delta + s; integrate
    // exactly over [0, r] and use symmetry in h.
    double integral = 0.0;
    for (std::size_t m = 0; m < m_full; ++m)
        integral += 0.5 * delta * delta * (q[m] + q[m + 1]);
    const double s_r = r - static_cast<double>(m_full) * delta;
    integral += (delta * s_r - 0.5 * s_r * s_r) * q[m_full] + 0.5 * s_r * s_r * q[m_full + 1];
    return std::sqrt(integral / r);
}

double structure_s2_shift_oracle(const SpectralField& u, double r) {
    const int n = u.grid().n_modes;
    const int mq = 4 * n;
    const PhysicalField base = to_physical(u, mq);
    const double cell = (two_pi / mq) * (two_pi / mq);

    std::vector<double> xs, ws;
    gauss_legendre(48, xs, ws);
    constexpr int n_ang = 96;

    double acc = 0.0;
    SpectralField shifted = u;
    for (std::size_t qd = 0; qd < xs.size(); ++qd) {
        const double rho = r * xs[qd];
        for (int a = 0; a < n_ang; ++a) {
            const double phi = two_pi * a / n_ang;
            const double hx = rho * std::cos(phi);
            const double hy = rho * std::sin(phi);
            for (int kx = -n; kx <= n; ++kx)
                for (int ky = -n; ky <= n; ++ky) {
                    const complexd ph = std::exp(complexd(0.0, kx * hx + ky * hy));
                    for (int c = 0; c < SpectralField::n_components; ++c)
                        shifted.at(c, kx, ky) = u.at(c, kx, ky) * ph;
                }
            const PhysicalField moved = to_physical(shifted, mq);
            double d2 = 0.0;
            for (std::size_t i = 0; i < moved.values.size(); ++i) {
                const double d = moved.values[i] - base.values[i];
                d2 += d * d;
            }
            d2 *= cell;
            // polar quadrature of (1/(pi r^2)) int F rho drho dtheta
            acc += ws[qd] * (rho * r) * d2 * (two_pi / n_ang);
        }
    }
    const double avg = acc / (two_pi / 2.0 * r * r);
    return std::sqrt(avg);
}

}  // namespace dalab
