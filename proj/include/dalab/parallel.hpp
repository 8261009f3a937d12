#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace dalab {

namespace detail {
inline int& thread_setting() {
    static int n = 1;
    return n;
}
}  // namespace detail

/// Worker count for the data-parallel kernels (member propagation, cost
/// matrices, per-node transport solves). 1 selects the serial reference
/// path. Results must be identical for every setting: kernels write to
/// index-keyed slots and all reductions run serially afterwards.
inline int parallel_threads() { return detail::thread_setting(); }
inline void set_parallel_threads(int n) { detail::thread_setting() = n < 1 ? 1 : n; }

/// Apply fn(i) for i in [0, n). Exceptions thrown by fn are captured per
/// index and the lowest-index one is rethrown after the loop, so error
/// reporting does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int nt = parallel_threads();
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errs(n);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (errs[i]) std::rethrow_exception(errs[i]);
}

}  // namespace dalab
