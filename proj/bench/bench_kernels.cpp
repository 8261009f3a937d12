// Compares the OpenMP kernels against the serial reference path and reports
// timings plus the maximum deviation (expected to be exactly zero: kernels
// write index-keyed slots and reduce serially).

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "dalab/metric.hpp"
#include "dalab/model.hpp"
#include "dalab/parallel.hpp"
#include "dalab/prior.hpp"
#include "dalab/structure.hpp"

using namespace dalab;

namespace {

double now() {
    using Clock = std::chrono::steady_clock;
    static const Clock::time_point start = Clock::now();
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Timing {
    double serial = 0.0;
    double parallel = 0.0;
    double max_dev = 0.0;
};

void report(const char* name, const Timing& t) {
    std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  max|dev| %g\n", name,
                t.serial, t.parallel, t.serial / t.parallel, t.max_dev);
}

}  // namespace

int main() {
    const int hw = omp_get_max_threads();
    std::printf("worker threads: 1 (reference) vs %d\n", hw);

    PriorSpec spec;
    spec.alpha = 2.0;
    spec.k_max = 6;
    spec.support_radius = 1.0;

    NSConfig nscfg;
    nscfg.viscosity = 1e-2;
    nscfg.grid = Grid2(32);
    nscfg.dt = 1.0 / 256.0;
    nscfg.t_end = 0.125;
    NsModel model(nscfg);

    const std::size_t n_members = 16;
    auto ens = sample_prior(spec, nscfg.grid, n_members, 7);

    // Kernel 1: ensemble propagation.
    Timing prop;
    std::vector<double> snaps = {0.0625, 0.125};
    WeightedEnsemble<SpectralField> out_serial, out_parallel;
    {
        set_parallel_threads(1);
        const double t0 = now();
        out_serial = pushforward(ens, [&](const SpectralField& u, std::size_t) {
            return model.segment(model.prepare_initial(u), 0.0, 0.125, snaps).states.back();
        });
        prop.serial = now() - t0;
    }
    {
        set_parallel_threads(hw);
        const double t0 = now();
        out_parallel = pushforward(ens, [&](const SpectralField& u, std::size_t) {
            return model.segment(model.prepare_initial(u), 0.0, 0.125, snaps).states.back();
        });
        prop.parallel = now() - t0;
    }
    for (std::size_t i = 0; i < n_members; ++i)
        prop.max_dev = std::max(prop.max_dev,
                                l2_distance(out_serial.members[i], out_parallel.members[i]));
    report("ensemble propagation", prop);

    // Kernel 2: pairwise cost matrix + exact transport.
    Timing w1t;
    W1Result w_serial, w_parallel;
    {
        set_parallel_threads(1);
        const double t0 = now();
        w_serial = w1(out_serial, ens,
                      [](const SpectralField& a, const SpectralField& b) {
                          return l2_distance(a, b);
                      });
        w1t.serial = now() - t0;
    }
    {
        set_parallel_threads(hw);
        const double t0 = now();
        w_parallel = w1(out_parallel, ens,
                        [](const SpectralField& a, const SpectralField& b) {
                            return l2_distance(a, b);
                        });
        w1t.parallel = now() - t0;
    }
    w1t.max_dev = std::abs(w_serial.value - w_parallel.value);
    report("cost matrix + transport", w1t);

    // Kernel 3: structure-function accumulation over an ensemble trajectory.
    Timing sf;
    double sf_serial = 0.0, sf_parallel = 0.0;
    {
        set_parallel_threads(1);
        auto fd = prior_pushforward(model, ens, 0.125, snaps);
        const double t0 = now();
        sf_serial = structure_function(fd, {0.1}, nscfg.viscosity, 1.0).rows[0].s2t;
        sf.serial = now() - t0;
    }
    {
        set_parallel_threads(hw);
        auto fd = prior_pushforward(model, ens, 0.125, snaps);
        const double t0 = now();
        sf_parallel = structure_function(fd, {0.1}, nscfg.viscosity, 1.0).rows[0].s2t;
        sf.parallel = now() - t0;
    }
    sf.max_dev = std::abs(sf_serial - sf_parallel);
    report("structure function", sf);

    const double total_dev = prop.max_dev + w1t.max_dev + sf.max_dev;
    std::printf("total deviation across kernels: %g\n", total_dev);
    return total_dev == 0.0 ? 0 : 1;
}
