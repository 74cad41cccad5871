#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

using cplx = std::complex<double>;

// Function sampled on a Grid, row-major over axes. Complex storage; the
// real hint records that imaginary parts are negligible (<= 1e-12 of the
// max modulus) so downstream code may treat the field as real-valued.
struct Field {
    Grid grid;
    std::vector<cplx> values;
    bool is_real_hint = false;

    Field() = default;
    explicit Field(const Grid& g, bool real_hint = false)
        : grid(g), values(g.size(), cplx{0.0, 0.0}), is_real_hint(real_hint) {}

    std::size_t size() const { return values.size(); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    // Largest |imag| relative to the max modulus.
    double imag_fraction() const {
        double m = max_abs();
        if (m == 0.0) return 0.0;
        double worst = 0.0;
        for (const auto& v : values) worst = std::max(worst, std::abs(v.imag()));
        return worst / m;
    }

    void check_layout(const Field& other, const char* what) const {
        if (!(grid == other.grid))
            throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
};

// Pointwise modulus, tagged real.
inline Field modulus_field(const Field& u) {
    Field out(u.grid, true);
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] = std::abs(u.values[i]);
    return out;
}

inline Field real_part(const Field& u) {
    Field out(u.grid, true);
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] = u.values[i].real();
    return out;
}

}  // namespace fnls
