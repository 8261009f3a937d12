#pragma once

#include <cmath>
#include <string>

namespace dalab {

/// Outcome of one scheme-property audit: lhs <= rhs*(1+tolerance) means pass.
/// margin is the absolute slack rhs*(1+tolerance) - lhs.
struct PropertyReport {
    std::string property;  // "energy", "coercivity", "time_regularity", ...
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    double margin = 0.0;
    bool pass = false;

    static PropertyReport check(std::string id, double lhs, double rhs, double tol) {
        PropertyReport r;
        r.property = std::move(id);
        r.lhs = lhs;
        r.rhs = rhs;
        r.tolerance = tol;
        r.margin = rhs * (1.0 + tol) - lhs;
        r.pass = std::isfinite(lhs) && lhs <= rhs * (1.0 + tol);
        return r;
    }
};

}  // namespace dalab
