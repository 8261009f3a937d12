#pragma once

#include <vector>

#include "dalab/common.hpp"

namespace dalab {

/// Optimal coupling of a finite transportation problem: pi_ij >= 0 with the
/// prescribed row/column marginals and cost = sum pi_ij c_ij at the optimum.
struct TransportPlan {
    std::size_t n = 0, m = 0;
    std::vector<double> flow;  // row-major n x m
    double cost = 0.0;
    double max_marginal_residual = 0.0;
    std::size_t augmentations = 0;

    double at(std::size_t i, std::size_t j) const { return flow[i * m + j]; }
};

/// Exact optimum of min sum pi_ij c_ij subject to the marginals a (size n)
/// and b (size m), both summing to one. Successive shortest augmenting paths
/// with node potentials on the dense bipartite graph: every intermediate
/// solution satisfies reduced-cost optimality, so termination yields the
/// exact optimum (up to floating-point roundoff), equivalent to the network
/// simplex on this problem class. Deterministic: ties break by index.
TransportPlan solve_transport(const std::vector<double>& cost, const std::vector<double>& a,
                              const std::vector<double>& b);

}  // namespace dalab
