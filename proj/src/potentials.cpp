#include "fnls/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

namespace {

double wrap_unit(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;
    return f;
}

double sin_sq_over_pi_sq(double t) {
    const double s = std::sin(std::numbers::pi * t);
    return s * s / (std::numbers::pi * std::numbers::pi);
}

}  // namespace

void validate_potential_spec(const PotentialSpec& spec, int dim, double s) {
    if (spec.kind == PotentialKind::zero) return;
    if (spec.kind == PotentialKind::periodic_power) {
        if (!(spec.kappa > 0))
            throw std::invalid_argument("potential: kappa must be positive");
        const double p_max = dim + 4.0 * s;
        if (!(spec.p > 0) || !(spec.p < p_max))
            throw std::invalid_argument(
                "potential: well exponent must satisfy 0 < p < d + 4s = " +
                std::to_string(p_max) + " (moment integrability), got p = " +
                std::to_string(spec.p));
        if (static_cast<int>(spec.x0.size()) != dim)
            throw std::invalid_argument("potential: x0 dimension mismatch");
        for (double c : spec.x0)
            if (c < 0.0 || c >= 1.0)
                throw std::invalid_argument("potential: x0 components must lie in [0,1)");
    }
}

int cells_per_period(const PotentialSpec& spec, const Grid& grid) {
    (void)spec;
    const double L = grid.length;
    const long Lint = std::lround(L);
    if (std::abs(L - static_cast<double>(Lint)) > 1e-12 || Lint <= 0)
        throw std::invalid_argument(
            "potential: side length must be an integer multiple of the unit period");
    if (grid.n % Lint != 0)
        throw std::invalid_argument("potential: N must be divisible by L so each period "
                                    "holds a whole number of cells");
    return static_cast<int>(grid.n / Lint);
}

std::pair<std::vector<double>, double> snapped_x0(const PotentialSpec& spec,
                                                  const Grid& grid) {
    const int cpp = cells_per_period(spec, grid);
    std::vector<double> snapped(spec.x0.size());
    double dist2 = 0.0;
    for (std::size_t i = 0; i < spec.x0.size(); ++i) {
        const double cells = spec.x0[i] * cpp;
        const double snap = wrap_unit(std::round(cells) / cpp);
        const double delta = spec.x0[i] - snap;
        snapped[i] = snap;
        dist2 += delta * delta;
    }
    return {snapped, std::sqrt(dist2)};
}

std::vector<std::vector<double>> well_positions(const PotentialSpec& spec, const Grid& grid) {
    auto [x0, snap] = snapped_x0(spec, grid);
    (void)snap;
    const long Lint = std::lround(grid.length);
    std::vector<std::vector<double>> wells;
    auto in_torus = [&](double x) { return x >= -0.5 * grid.length && x < 0.5 * grid.length; };
    if (grid.dim == 1) {
        for (long z = -Lint / 2 - 1; z <= Lint / 2 + 1; ++z) {
            const double x = x0[0] + static_cast<double>(z);
            if (in_torus(x)) wells.push_back({x});
        }
    } else {
        for (long z0 = -Lint / 2 - 1; z0 <= Lint / 2 + 1; ++z0)
            for (long z1 = -Lint / 2 - 1; z1 <= Lint / 2 + 1; ++z1) {
                const double x = x0[0] + static_cast<double>(z0);
                const double y = x0[1] + static_cast<double>(z1);
                if (in_torus(x) && in_torus(y)) wells.push_back({x, y});
            }
    }
    // nearest to the origin first (deterministic multistart order)
    std::sort(wells.begin(), wells.end(), [](const auto& a, const auto& b) {
        double ra = 0, rb = 0;
        for (double c : a) ra += c * c;
        for (double c : b) rb += c * c;
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return wells;
}

Field sample_potential(const PotentialSpec& spec, const Grid& grid) {
    if (spec.kind == PotentialKind::zero) return constant_field(grid, 0.0);
    if (spec.kind == PotentialKind::samples) {
        if (spec.samples.size() != grid.size())
            throw std::invalid_argument("potential: sample count does not match the grid");
        Field out(grid, true);
        out.values = spec.samples;
        return out;
    }
    auto [x0, snap] = snapped_x0(spec, grid);
    (void)snap;
    Field out(grid, true);
    const int n = grid.n;
    const int cpp = cells_per_period(spec, grid);
    // Integer cell arithmetic keeps the zero set exact on the lattice.
    auto base_at = [&](int i, double x0_axis) {
        const long m0 = std::lround(x0_axis * cpp);
        const long r = ((static_cast<long>(i) - n / 2 - m0) % cpp + cpp) % cpp;
        return sin_sq_over_pi_sq(static_cast<double>(r) / cpp);
    };
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double base = base_at(i, x0[0]);
            out.values[static_cast<std::size_t>(i)] =
                spec.kappa * std::pow(base, 0.5 * spec.p);
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0) {
            const double b0 = base_at(i0, x0[0]);
            for (int i1 = 0; i1 < n; ++i1) {
                const double b = b0 + base_at(i1, x0[1]);
                out.values[static_cast<std::size_t>(i0) * n + i1] =
                    spec.kappa * std::pow(b, 0.5 * spec.p);
            }
        }
    }
    return out;
}

V3Fit validate_v3(const PotentialSpec& spec, const Grid& grid) {
    if (spec.kind == PotentialKind::zero)
        throw std::invalid_argument("validate_v3: zero potential has no well exponent");
    Field V = sample_potential(spec, grid);
    auto [x0, snap] = snapped_x0(spec, grid);
    (void)snap;
    const double h = grid.spacing();
    const double r_lo = 2.0 * h, r_hi = 0.1;

    auto wrap = [&](double dx) {
        while (dx > 0.5 * grid.length) dx -= grid.length;
        while (dx < -0.5 * grid.length) dx += grid.length;
        return dx;
    };

    std::vector<double> xs, ys;
    const int n = grid.n;
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double r = std::abs(wrap(grid.coord(i) - x0[0]));
            const double v = V.values[static_cast<std::size_t>(i)].real();
            if (r >= r_lo && r <= r_hi && v > 0) {
                xs.push_back(std::log(r));
                ys.push_back(std::log(v));
            }
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) {
                const double dx = wrap(grid.coord(i0) - x0[0]);
                const double dy = wrap(grid.coord(i1) - x0[1]);
                const double r = std::sqrt(dx * dx + dy * dy);
                const double v = V.values[static_cast<std::size_t>(i0) * n + i1].real();
                if (r >= r_lo && r <= r_hi && v > 0) {
                    xs.push_back(std::log(r));
                    ys.push_back(std::log(v));
                }
            }
    }
    if (xs.size() < 8)
        throw std::invalid_argument("validate_v3: fit window holds fewer than 8 radii; "
                                    "refine the grid");

    // Cubic fit in log-log coordinates, read off at the window's inner edge:
    // the higher-order terms absorb the Taylor correction of V away from the
    // well, which would otherwise tilt a straight-line fit, and kappa is
    // exponentially sensitive to the slope through the extrapolation r^p.
    const std::size_t m = xs.size();
    const double x_left = std::log(r_lo);
    double a[4][5] = {};
    for (std::size_t i = 0; i < m; ++i) {
        const double x = xs[i] - x_left;  // centered at the inner edge
        double pw[7] = {1, x, x * x, 0, 0, 0, 0};
        for (int k = 3; k < 7; ++k) pw[k] = pw[k - 1] * x;
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) a[r][c] += pw[r + c];
            a[r][4] += pw[r] * ys[i];
        }
    }
    for (int col = 0; col < 4; ++col) {  // Gaussian elimination, partial pivot
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        for (int c = 0; c < 5; ++c) std::swap(a[col][c], a[piv][c]);
        for (int r = 0; r < 4; ++r) {
            if (r == col || a[col][col] == 0.0) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = 0; c < 5; ++c) a[r][c] -= f * a[col][c];
        }
    }
    const double a0 = a[0][4] / a[0][0];
    const double a1 = a[1][4] / a[1][1];
    V3Fit fit;
    fit.p_hat = a1;  // local slope at r = r_lo
    fit.kappa_hat = std::exp(a0 - a1 * x_left);
    fit.n_points = static_cast<int>(m);
    return fit;
}

SpectralBottomReport spectral_bottom(const Field& V, double s, const SolverConfig& cfg) {
    if (!(s > 0) || !(s < 1))
        throw std::invalid_argument("spectral_bottom: s must lie in (0,1)");
    if (V.imag_fraction() > 1e-10)
        throw std::invalid_argument("spectral_bottom: potential must be real-valued");
    SolverConfig linear_cfg = cfg;
    linear_cfg.nonlinear_coeff = 0.0;
    linear_cfg.divergence_energy_floor = -std::numeric_limits<double>::infinity();
    auto [phi, rep] = normalized_gradient_flow(V.grid, s, /*alpha=*/1.0, &V, 1.0, linear_cfg);
    SpectralBottomReport out;
    out.value = rep.multiplier;  // Rayleigh quotient of the final iterate
    out.residual = rep.residual;
    out.iterations = rep.iterations;
    out.converged = rep.converged;
    out.eigenfield = std::move(phi);
    return out;
}

V2Report validate_v2(const Field& V, double s, const SolverConfig& cfg) {
    auto bottom = spectral_bottom(V, s, cfg);
    V2Report rep;
    rep.min_v = V.values[0].real();
    for (const auto& v : V.values) rep.min_v = std::min(rep.min_v, v.real());
    rep.bottom = bottom.value;
    rep.margin = rep.bottom - rep.min_v;
    rep.residual = bottom.residual;
    const double tol = std::max(1e-8, 10.0 * bottom.residual);
    rep.holds = rep.margin > tol;
    return rep;
}

}  // namespace fnls
