#include "fnls/rng.hpp"

#include <cmath>

#include "fnls/fft.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

Field random_smooth_field(const Grid& grid, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> coeff(grid.size(), cplx{0.0, 0.0});
    const int n = grid.n;
    const double mc = n / 8.0;
    auto damp = [&](int m) { return std::exp(-(m / mc) * (m / mc)); };
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            int m = std::abs(grid.freq_index(i));
            coeff[static_cast<std::size_t>(i)] = damp(m) * cplx{rng.gauss(), rng.gauss()};
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) {
                int m = std::max(std::abs(grid.freq_index(i0)), std::abs(grid.freq_index(i1)));
                coeff[static_cast<std::size_t>(i0) * n + i1] =
                    damp(m) * cplx{rng.gauss(), rng.gauss()};
            }
    }
    Field f = inverse_fft(coeff, grid, false);
    Field out = real_part(f);
    if (mass(out) == 0.0) out.values[0] = 1.0;  // vanishing draw guard
    return out;
}

}  // namespace fnls
