#include "fnls/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fnls/fft.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

double alpha_supremum(int dim, double s) {
    if (dim > 2.0 * s) return 4.0 * s / (dim - 2.0 * s);
    return std::numeric_limits<double>::infinity();
}

void require_admissible_alpha(int dim, double s, double alpha) {
    if (!(alpha > 0))
        throw std::invalid_argument("alpha must be positive, got " + std::to_string(alpha));
    const double sup = alpha_supremum(dim, s);
    if (alpha >= sup)
        throw std::invalid_argument(
            "alpha = " + std::to_string(alpha) +
            " is not admissible: requires alpha < 4s/(d-2s) = " + std::to_string(sup) +
            " when d > 2s");
}

EnergyBreakdown energy(const Field& u, const Field* V, double s, double alpha) {
    require_admissible_alpha(u.grid.dim, s, alpha);
    EnergyBreakdown e;
    e.kinetic = 0.5 * half_frac_norm_sq(u, s);
    if (V) {
        u.check_layout(*V, "energy");
        if (V->imag_fraction() > 1e-10)
            throw std::invalid_argument("energy: potential must be real-valued");
        double pot = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            pot += V->values[i].real() * std::norm(u.values[i]);
        e.potential = 0.5 * pot * u.grid.cell_volume();
    }
    double nl = 0.0;
    for (const auto& v : u.values) nl += std::pow(std::abs(v), alpha + 2.0);
    e.nonlinear = nl * u.grid.cell_volume() / (alpha + 2.0);
    e.total = e.kinetic + e.potential - e.nonlinear;
    return e;
}

double weinstein(const Field& u, double s, double alpha) {
    require_admissible_alpha(u.grid.dim, s, alpha);
    const double m = mass(u);
    if (m == 0.0) throw std::invalid_argument("weinstein: zero field");
    const double d = u.grid.dim;
    const double k2 = half_frac_norm_sq(u, s);
    double p = 0.0;
    for (const auto& v : u.values) p += std::pow(std::abs(v), alpha + 2.0);
    p *= u.grid.cell_volume();
    const double kin_exp = d * alpha / (4.0 * s);             // power of ||.||^2
    const double mass_exp = 0.5 * (alpha + 2.0 - d * alpha / (2.0 * s));
    return std::pow(k2, kin_exp) * std::pow(m, mass_exp) / p;
}

GnConstant gn_constant(const Field& Q_alpha, double s, double alpha) {
    require_admissible_alpha(Q_alpha.grid.dim, s, alpha);
    const double d = Q_alpha.grid.dim;
    GnConstant g;
    g.from_weinstein = 1.0 / weinstein(Q_alpha, s, alpha);
    const double da = d * alpha;
    const double t = 2.0 * s * (alpha + 2.0);
    g.closed_form = std::pow((t - da) / da, da / (4.0 * s)) * (t / (t - da)) *
                    std::pow(mass(Q_alpha), -0.5 * alpha);
    g.rel_disagreement = std::abs(g.from_weinstein - g.closed_form) /
                         std::max(g.from_weinstein, g.closed_form);
    if (g.rel_disagreement > 1e-2)
        throw NotGroundState("gn_constant: routes disagree by " +
                             std::to_string(g.rel_disagreement) +
                             " (input is not a converged ground state)");
    return g;
}

PohozaevReport pohozaev_check(const Field& Q_alpha, double s, double alpha) {
    require_admissible_alpha(Q_alpha.grid.dim, s, alpha);
    const double d = Q_alpha.grid.dim;
    PohozaevReport rep;
    rep.half_norm_sq = half_frac_norm_sq(Q_alpha, s);
    if (rep.half_norm_sq == 0.0)
        throw std::invalid_argument("pohozaev_check: zero field");
    rep.mass_sq = mass(Q_alpha);
    double p = 0.0;
    for (const auto& v : Q_alpha.values) p += std::pow(std::abs(v), alpha + 2.0);
    rep.lp_power = p * Q_alpha.grid.cell_volume();
    const double c1 = d * alpha / (2.0 * s * (alpha + 2.0));
    const double c2 = d * alpha / (4.0 * s - (d - 2.0 * s) * alpha);
    rep.r1 = std::abs(rep.half_norm_sq - c1 * rep.lp_power) / rep.half_norm_sq;
    rep.r2 = std::abs(rep.half_norm_sq - c2 * rep.mass_sq) / rep.half_norm_sq;
    rep.ground_state_like = std::max(rep.r1, rep.r2) < 5e-2;
    return rep;
}

double critical_mass(const Field& Q) { return mass(Q); }

double concentration_function(const Field& u, double R) {
    if (!(R > 0) || R >= 0.5 * u.grid.length)
        throw std::invalid_argument("concentration_function: need 0 < R < L/2");
    Field density(u.grid, true);
    for (std::size_t i = 0; i < u.size(); ++i) density.values[i] = std::norm(u.values[i]);
    Field ball(u.grid, true);
    const double r2 = R * R;
    for (std::size_t i = 0; i < u.size(); ++i)
        ball.values[i] = u.grid.radius_sq(i) <= r2 ? 1.0 : 0.0;
    auto a = forward_fft(density);
    auto b = forward_fft(ball);
    const double npts = static_cast<double>(u.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * npts;
    Field conv = inverse_fft(a, u.grid, true);
    double best = 0.0;
    for (const auto& v : conv.values) best = std::max(best, v.real());
    best *= u.grid.cell_volume();
    return std::clamp(best, 0.0, mass(u));
}

namespace {

struct LogLogFit {
    double intercept = 0.0, slope = 0.0, curvature = 0.0;
};

// Least-squares line plus a quadratic refit for the curvature diagnostic.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    LogLogFit f;
    const double det = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;

    // quadratic in centered x via normal equations:
    // [n 0 s2; 0 s2 s3; s2 s3 s4] [a0 a1 a2] = [b0 b1 b2]
    const double nn = static_cast<double>(n);
    double mx = sx / nn;
    double s2 = 0, s3 = 0, s4 = 0, b1 = 0, b2 = 0, b0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double c = x[i] - mx, c2 = c * c;
        s2 += c2; s3 += c2 * c; s4 += c2 * c2;
        b0 += y[i]; b1 += c * y[i]; b2 += c2 * y[i];
    }
    const double det3 = nn * (s2 * s4 - s3 * s3) - s2 * s2 * s2;
    if (det3 != 0.0)
        f.curvature = (nn * (s2 * b2 - s3 * b1) - b0 * s2 * s2) / det3;
    return f;
}

}  // namespace

DecayFit decay_fit(const Field& Q, double r_lo, double r_hi) {
    if (!(r_lo > 0) || !(r_hi > r_lo))
        throw std::invalid_argument("decay_fit: need 0 < r_lo < r_hi");
    if (r_hi >= 0.5 * Q.grid.length)
        throw std::invalid_argument("decay_fit: r_hi must be below L/2");
    const double h = Q.grid.spacing();
    const int nbins = static_cast<int>(std::floor(0.5 * Q.grid.length / h)) + 1;
    std::vector<double> bin_max(static_cast<std::size_t>(nbins), 0.0);
    std::vector<double> bin_r(static_cast<std::size_t>(nbins), 0.0);
    for (std::size_t i = 0; i < Q.size(); ++i) {
        const double r = std::sqrt(Q.grid.radius_sq(i));
        const int b = static_cast<int>(r / h);
        if (b >= nbins) continue;
        const double v = std::abs(Q.values[i]);
        if (v > bin_max[static_cast<std::size_t>(b)]) {
            bin_max[static_cast<std::size_t>(b)] = v;
            bin_r[static_cast<std::size_t>(b)] = r;
        }
    }
    std::vector<double> xs, ys;
    for (int b = 0; b < nbins; ++b) {
        const double r = bin_r[static_cast<std::size_t>(b)];
        const double v = bin_max[static_cast<std::size_t>(b)];
        if (r >= r_lo && r <= r_hi && v > 0.0) {
            xs.push_back(std::log(r));
            ys.push_back(std::log(v));
        }
    }
    if (xs.size() < 8)
        throw std::invalid_argument("decay_fit: window holds fewer than 8 radii");
    auto f = fit_loglog(xs, ys);
    DecayFit out;
    out.exponent = f.slope;
    out.prefactor = std::exp(f.intercept);
    out.n_points = static_cast<int>(xs.size());
    out.curvature = f.curvature;
    out.non_power_law = std::abs(f.curvature) > 0.1;
    return out;
}

Field rearrange_decreasing(const Field& u) {
    std::vector<double> vals(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) vals[i] = std::abs(u.values[i]);
    std::sort(vals.begin(), vals.end(), std::greater<double>());

    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = u.grid.radius_sq(a), rb = u.grid.radius_sq(b);
        if (ra != rb) return ra < rb;
        return a < b;  // lexicographic tie-break
    });

    Field out(u.grid, true);
    for (std::size_t i = 0; i < u.size(); ++i) out.values[order[i]] = vals[i];
    return out;
}

}  // namespace fnls
