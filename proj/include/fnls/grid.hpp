#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fnls {

// Uniform periodic torus [-L/2, L/2)^dim with N samples per axis.
// Samples sit at x_j = -L/2 + j*h, h = L/N; dual wavenumbers are
// k_m = 2*pi*m/L for m in {-N/2, ..., N/2-1} stored in FFT layout.
struct Grid {
    int dim = 1;
    int n = 0;          // points per axis (power of two, >= 64)
    double length = 0;  // side length L, same for each axis

    double spacing() const { return length / n; }

    std::size_t size() const {
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        return total;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing();
        return v;
    }

    double coord(int j) const { return -0.5 * length + j * spacing(); }

    // Signed mode index for FFT-layout position i: 0..N/2-1, then -N/2..-1.
    int freq_index(int i) const { return i < n / 2 ? i : i - n; }

    double wavenumber(int i) const {
        return 2.0 * std::numbers::pi * freq_index(i) / length;
    }

    double nyquist_wavenumber() const {
        return std::numbers::pi * n / length;
    }

    // |k|^2 at a flat spectral index (row-major over axes).
    double wavenumber_sq(std::size_t flat) const {
        if (dim == 1) {
            double k = wavenumber(static_cast<int>(flat));
            return k * k;
        }
        int i0 = static_cast<int>(flat / static_cast<std::size_t>(n));
        int i1 = static_cast<int>(flat % static_cast<std::size_t>(n));
        double k0 = wavenumber(i0), k1 = wavenumber(i1);
        return k0 * k0 + k1 * k1;
    }

    // Squared distance from the torus origin for a flat sample index.
    double radius_sq(std::size_t flat) const {
        if (dim == 1) {
            double x = coord(static_cast<int>(flat));
            return x * x;
        }
        int i0 = static_cast<int>(flat / static_cast<std::size_t>(n));
        int i1 = static_cast<int>(flat % static_cast<std::size_t>(n));
        double x = coord(i0), y = coord(i1);
        return x * x + y * y;
    }

    bool operator==(const Grid&) const = default;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Grid make_grid(int dim, int n, double length) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("make_grid: dim must be 1 or 2, got " +
                                    std::to_string(dim));
    if (!is_power_of_two(n))
        throw std::invalid_argument("make_grid: N must be a power of two, got " +
                                    std::to_string(n));
    if (n < 64)
        throw std::invalid_argument("make_grid: N must be >= 64, got " +
                                    std::to_string(n));
    if (!(length > 0))
        throw std::invalid_argument("make_grid: side length must be positive");
    return Grid{dim, n, length};
}

}  // namespace fnls
