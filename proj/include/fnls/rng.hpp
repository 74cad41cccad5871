#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fnls/field.hpp"
#include "fnls/grid.hpp"

namespace fnls {

// mt19937_64 raw output mapped to doubles by hand, so streams are identical
// across standard libraries for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double u01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Box-Muller
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01(), u2 = u01();
        while (u1 <= 0.0) u1 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Random band-limited field: Gaussian Fourier coefficients damped by
// exp(-(m/m_c)^2) with m_c = N/8, real part taken. Smooth, zero-safe.
Field random_smooth_field(const Grid& grid, std::uint64_t seed);

}  // namespace fnls
