#include "dalab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace dalab {
namespace fft {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int m, bool forward) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(m, forward ? -1 : 1);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<complexd> buf(static_cast<std::size_t>(m) * m);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft_2d(m, m, p, p, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void dft2(std::vector<complexd>& data, int m, bool forward) {
    require(data.size() == static_cast<std::size_t>(m) * m, "dft2: size mismatch");
    fftw_plan plan = get_plan(m, forward);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace fft

PhysicalField to_physical(const SpectralField& field, int m_quad) {
    const int n = field.grid().n_modes;
    require(m_quad >= 2, "to_physical: quadrature grid too small");
    PhysicalField out;
    out.m = m_quad;
    out.values.assign(static_cast<std::size_t>(SpectralField::n_components) * m_quad * m_quad,
                      0.0);
    std::vector<complexd> buf(static_cast<std::size_t>(m_quad) * m_quad);
    for (int c = 0; c < SpectralField::n_components; ++c) {
        std::fill(buf.begin(), buf.end(), complexd(0.0));
        // Scatter coefficients into DFT bins; wavenumber k maps to bin k mod m.
        for (int kx = -n; kx <= n; ++kx) {
            const int bx = (kx % m_quad + m_quad) % m_quad;
            for (int ky = -n; ky <= n; ++ky) {
                const int by = (ky % m_quad + m_quad) % m_quad;
                buf[static_cast<std::size_t>(bx) * m_quad + by] += field.at(c, kx, ky);
            }
        }
        fft::dft2(buf, m_quad, /*forward=*/false);
        for (int ix = 0; ix < m_quad; ++ix)
            for (int iy = 0; iy < m_quad; ++iy)
                out.at(c, ix, iy) = buf[static_cast<std::size_t>(ix) * m_quad + iy].real();
    }
    return out;
}

SpectralField from_physical(const PhysicalField& samples, int n_modes) {
    const int m = samples.m;
    require(m >= 2 * n_modes + 1, "from_physical: grid under-resolves the requested band");
    require(samples.values.size() ==
                static_cast<std::size_t>(SpectralField::n_components) * m * m,
            "from_physical: sample block size mismatch");
    SpectralField out{Grid2(n_modes)};
    std::vector<complexd> buf(static_cast<std::size_t>(m) * m);
    const double scale = 1.0 / (static_cast<double>(m) * m);
    for (int c = 0; c < SpectralField::n_components; ++c) {
        for (int ix = 0; ix < m; ++ix)
            for (int iy = 0; iy < m; ++iy)
                buf[static_cast<std::size_t>(ix) * m + iy] = samples.at(c, ix, iy);
        fft::dft2(buf, m, /*forward=*/true);
        for (int kx = -n_modes; kx <= n_modes; ++kx) {
            const int bx = (kx % m + m) % m;
            for (int ky = -n_modes; ky <= n_modes; ++ky) {
                const int by = (ky % m + m) % m;
                out.at(c, kx, ky) = buf[static_cast<std::size_t>(bx) * m + by] * scale;
            }
        }
    }
    out.symmetrize();
    return out;
}

}  // namespace dalab
