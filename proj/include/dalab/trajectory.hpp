#pragma once

#include <vector>

#include "dalab/common.hpp"
#include "dalab/spectral_field.hpp"

namespace dalab {

/// Time-indexed snapshots of one forward solve. Times are strictly
/// increasing; all states share one grid. Full solves start at t = 0;
/// stage-local segments reuse the same container with a shifted origin.
struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;

    void validate() const {
        require(!times.empty() && times.size() == states.size(),
                "Trajectory: times/states length mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            require(times[i] > times[i - 1], "Trajectory: times must be strictly increasing");
        for (std::size_t i = 1; i < states.size(); ++i)
            require(states[i].same_shape(states[0]), "Trajectory: states must share one grid");
    }

    std::size_t size() const { return times.size(); }

    /// Index of the snapshot nearest to t.
    std::size_t nearest(double t) const {
        std::size_t best = 0;
        double d = std::abs(times[0] - t);
        for (std::size_t i = 1; i < times.size(); ++i) {
            double di = std::abs(times[i] - t);
            if (di < d) {
                d = di;
                best = i;
            }
        }
        return best;
    }
};

}  // namespace dalab
