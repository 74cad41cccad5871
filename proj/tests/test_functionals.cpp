#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fnls/functionals.hpp"
#include "fnls/rng.hpp"
#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Exact solution of (-Delta)^{1/2} u + u - u^2 = 0 in 1D.
Field bo_soliton(const Grid& g) {
    Field q(g, true);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        q.values[i] = 2.0 / (1.0 + x * x);
    }
    return q;
}

// Critical (d=1, s=1/2, alpha=2) ground state, computed once. The zero-energy
// and Pohozaev contracts are truncation-limited at O(L^-2), hence the large
// torus here.
const Field& critical_ground_state() {
    static Field q = [] {
        SolverConfig cfg;
        cfg.tol_grad = 1e-9;
        auto [Q, rep] = petviashvili(make_grid(1, 16384, 512.0), 0.5, 2.0, cfg);
        REQUIRE(rep.converged);
        return Q;
    }();
    return q;
}

}  // namespace

TEST_CASE("alpha admissibility window") {
    CHECK(alpha_supremum(1, 0.5) == std::numeric_limits<double>::infinity());
    CHECK(alpha_supremum(2, 0.5) == doctest::Approx(2.0));
    CHECK(alpha_supremum(1, 0.25) == doctest::Approx(2.0));
    CHECK_NOTHROW(require_admissible_alpha(1, 0.5, 3.0));
    CHECK_THROWS_AS(require_admissible_alpha(2, 0.5, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(require_admissible_alpha(1, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("energy breakdown basics") {
    Grid g = make_grid(1, 256, 32.0);
    Field zero = constant_field(g, 0.0);
    auto e0 = energy(zero, nullptr, 0.5, 1.0);
    CHECK(e0.kinetic == 0.0);
    CHECK(e0.potential == 0.0);
    CHECK(e0.nonlinear == 0.0);
    CHECK(e0.total == 0.0);

    Field bump = make_gaussian(g, 1.0, {0.0});
    auto e = energy(bump, nullptr, 0.5, 1.0);
    CHECK(e.potential == 0.0);
    CHECK(e.total == doctest::Approx(e.kinetic - e.nonlinear));
    CHECK(e.kinetic > 0);
    CHECK(e.nonlinear > 0);

    Field v = constant_field(g, 2.0);
    auto ev = energy(bump, &v, 0.5, 1.0);
    CHECK(rel_err(ev.potential, mass(bump)) < 1e-12);

    // translation invariance without potential
    Field moved = shift(bump, {3.7});
    auto em = energy(moved, nullptr, 0.5, 1.0);
    CHECK(rel_err(em.total, e.total) < 1e-10);
}

TEST_CASE("exact soliton: mass, half norm, Pohozaev, sharp constant") {
    Grid g = make_grid(1, 4096, 256.0);
    Field q = bo_soliton(g);
    const double s = 0.5, alpha = 1.0;

    // closed-form integrals: ||Q||^2 = 2pi, ||(-D)^{1/4}Q||^2 = pi, int Q^3 = 3pi
    CHECK(rel_err(mass(q), 2.0 * std::numbers::pi) < 1e-3);
    CHECK(rel_err(half_frac_norm_sq(q, s), std::numbers::pi) < 1e-3);
    const double p3 = std::pow(lp_norm(q, 3.0), 3.0);
    CHECK(rel_err(p3, 3.0 * std::numbers::pi) < 1e-3);

    auto rep = pohozaev_check(q, s, alpha);
    const double tail = boundary_tail_fraction(q);
    CHECK(rep.r1 < 1e-3 + tail);
    CHECK(rep.r2 < 1e-3 + tail);  // d*alpha/(4s-(d-2s)alpha) = 1/2 here
    CHECK(rep.ground_state_like);

    // both routes to the sharp constant agree and match 3/(2 sqrt(pi))
    auto gn = gn_constant(q, s, alpha);
    const double want = 3.0 / (2.0 * std::sqrt(std::numbers::pi));
    CHECK(gn.rel_disagreement < 1e-3);
    CHECK(rel_err(gn.from_weinstein, want) < 1e-3);
    CHECK(rel_err(gn.closed_form, want) < 1e-3);

    // rescaling leaves the constant alone
    auto gn2 = gn_constant(dilate(q, 1.5), s, alpha);
    CHECK(rel_err(gn2.from_weinstein, gn.from_weinstein) < 1e-3);

    // a random field is far from satisfying the identities
    Field noise = random_smooth_field(g, 3);
    auto bad = pohozaev_check(noise, s, alpha);
    CHECK(std::max(bad.r1, bad.r2) > 0.05);
    CHECK_FALSE(bad.ground_state_like);
}

TEST_CASE("weinstein functional: homogeneity, dilation invariance, zero rejection") {
    Grid g = make_grid(1, 4096, 512.0);
    Field u(g, true);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        u.values[i] = std::exp(-0.5 * x * x) * (1.0 + 0.3 * std::cos(3.0 * x));
    }
    const double s = 0.5, alpha = 2.0;
    const double j0 = weinstein(u, s, alpha);

    Field su = u;
    for (auto& v : su.values) v *= -17.3;
    CHECK(rel_err(weinstein(su, s, alpha), j0) < 1e-12);

    for (double lam : {0.5, 2.0})
        CHECK(rel_err(weinstein(dilate(u, lam), s, alpha), j0) < 1e-4);

    CHECK_THROWS_AS(weinstein(constant_field(g, 0.0), s, alpha), std::invalid_argument);
}

TEST_CASE("critical ground state: zero energy, Pohozaev ratio, sharpness") {
    const Field& Q = critical_ground_state();
    const double s = 0.5, alpha = 2.0;
    const double tail = boundary_tail_fraction(Q);

    // E(Q) = 0 at the critical exponent (no potential)
    auto e = energy(Q, nullptr, s, alpha);
    CHECK(std::abs(e.total) <= 1e-4 * e.kinetic);

    // ||(-D)^{s/2}Q||^2 = (d/2s) ||Q||^2, ratio exactly 1 here
    auto rep = pohozaev_check(Q, s, alpha);
    CHECK(rel_err(rep.half_norm_sq, rep.mass_sq) < 1e-3 + tail);
    CHECK(rep.r1 < 1e-3 + tail);
    CHECK(rep.r2 < 1e-3 + tail);

    // critical closed form: C_opt = ((d+2s)/d) ||Q||^{-4s/d}
    auto gn = gn_constant(Q, s, alpha);
    CHECK(rel_err(gn.closed_form, 2.0 / mass(Q)) < 1e-12);
    CHECK(gn.rel_disagreement < 1e-3);

    // sharpness: J(v) >= J(Q) (1 - 1e-3) over random smooth fields
    const double jq = weinstein(Q, s, alpha);
    for (int k = 0; k < 20; ++k) {
        Field v = random_smooth_field(Q.grid, 100 + k);
        CHECK(weinstein(v, s, alpha) >= jq * (1.0 - 1e-3));
    }
}

TEST_CASE("GN inequality with the computed constant") {
    const Field& Q = critical_ground_state();
    const double s = 0.5, alpha = 2.0, d = 1.0;
    auto gn = gn_constant(Q, s, alpha);
    for (int k = 0; k < 20; ++k) {
        Field v = random_smooth_field(Q.grid, 500 + k);
        const double lhs = std::pow(lp_norm(v, alpha + 2.0), alpha + 2.0);
        const double rhs = gn.from_weinstein *
                           std::pow(half_frac_norm_sq(v, s), d * alpha / (4.0 * s)) *
                           std::pow(mass(v), 0.5 * (alpha + 2.0 - d * alpha / (2.0 * s)));
        CHECK(lhs <= rhs * (1.0 + 1e-3));
    }
}

TEST_CASE("critical mass: grid reproducibility and scale invariance") {
    SolverConfig cfg;
    cfg.tol_grad = 1e-9;
    auto [q1, r1] = petviashvili(make_grid(1, 4096, 128.0), 0.5, 2.0, cfg);
    auto [q2, r2] = petviashvili(make_grid(1, 8192, 256.0), 0.5, 2.0, cfg);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    const double a1 = critical_mass(q1), a2 = critical_mass(q2);
    CHECK(rel_err(a1, a2) < 1e-3);

    CHECK(rel_err(critical_mass(dilate(q1, 1.3)), a1) < 1e-4);
}

TEST_CASE("critical mass approaches the classical value as s -> 1 (d=2)") {
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    cfg.init.width = 1.5;
    auto [Q, rep] = petviashvili(make_grid(2, 256, 32.0), 0.95, 2.0 * 0.95, cfg);
    REQUIRE(rep.converged);
    // the classical d=2 critical mass is about 11.70; s = 0.95 should land
    // within the 15% corridor
    CHECK(rel_err(critical_mass(Q), 11.70) < 0.15);
}

TEST_CASE("concentration function") {
    Grid g = make_grid(1, 1024, 64.0);
    Field bump = make_gaussian(g, 0.5, {3.0});
    scale_to_mass(bump, 2.0);

    CHECK(concentration_function(bump, 31.0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(concentration_function(bump, 3.0) > 0.99 * 2.0);

    // two bumps separated by L/2 with mass 1 each: small balls capture one
    Field two(g, true);
    Field b1 = make_gaussian(g, 0.5, {-16.0});
    Field b2 = make_gaussian(g, 0.5, {16.0});
    for (std::size_t i = 0; i < two.size(); ++i)
        two.values[i] = b1.values[i] + b2.values[i];
    scale_to_mass(two, 2.0);
    const double m8 = concentration_function(two, 8.0);
    CHECK(m8 == doctest::Approx(1.0).epsilon(1e-3));

    // non-decreasing in R
    double prev = 0;
    for (double r : {1.0, 2.0, 4.0, 8.0, 16.0, 30.0}) {
        const double m = concentration_function(two, r);
        CHECK(m >= prev - 1e-12);
        prev = m;
    }
    CHECK_THROWS_AS(concentration_function(bump, 32.0), std::invalid_argument);
}

TEST_CASE("decay fit: soliton power law vs Gaussian steepening") {
    Grid g = make_grid(1, 4096, 256.0);
    Field q = bo_soliton(g);
    auto fit = decay_fit(q, 10.0, 50.0);
    CHECK(std::abs(fit.exponent - (-2.0)) < 0.1);
    CHECK_FALSE(fit.non_power_law);

    Field gauss = make_gaussian(g, 3.0, {0.0});
    auto gf = decay_fit(gauss, 6.0, 20.0);
    CHECK(gf.non_power_law);
    CHECK(gf.exponent < -2.0);  // steepening

    CHECK_THROWS_AS(decay_fit(q, 10.0, 10.2), std::invalid_argument);  // < 8 radii
    CHECK_THROWS_AS(decay_fit(q, 10.0, 200.0), std::invalid_argument);
}

TEST_CASE("symmetric decreasing rearrangement") {
    Grid g = make_grid(1, 512, 32.0);
    Field u = random_smooth_field(g, 17);

    Field r = rearrange_decreasing(u);
    // exact multiset preservation -> all L^q norms match exactly
    for (double q : {1.0, 2.0, 3.5})
        CHECK(rel_err(lp_norm(r, q), lp_norm(u, q)) < 1e-13);

    // radially decreasing away from the origin
    for (int i = g.n / 2; i + 1 < g.n; ++i)
        CHECK(r.values[i + 1].real() <= r.values[i].real() + 1e-15);

    // an already radially decreasing bump is (up to ties) fixed
    Field bump = make_gaussian(g, 2.0, {0.0});
    Field rb = rearrange_decreasing(bump);
    double worst = 0;
    for (std::size_t i = 0; i < bump.size(); ++i)
        worst = std::max(worst, std::abs(rb.values[i] - bump.values[i]));
    CHECK(worst < 1e-12);

    // grid-level fractional Polya-Szego with the 5% slack
    int violations = 0;
    for (int k = 0; k < 30; ++k) {
        Field v = random_smooth_field(g, 900 + k);
        Field av = modulus_field(v);
        Field rv = rearrange_decreasing(v);
        if (half_frac_norm_sq(rv, 0.5) > half_frac_norm_sq(av, 0.5) * 1.05) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("modulus lowers the energy of complex fields") {
    Grid g = make_grid(1, 512, 64.0);
    for (int k = 0; k < 10; ++k) {
        Field u = random_smooth_field(g, 40 + k);
        Field w = random_smooth_field(g, 70 + k);
        Field c(g, false);
        for (std::size_t i = 0; i < c.size(); ++i)
            c.values[i] = cplx{u.values[i].real(), 0.5 * w.values[i].real()};
        auto ec = energy(c, nullptr, 0.5, 2.0);
        auto em = energy(modulus_field(c), nullptr, 0.5, 2.0);
        CHECK(em.total <= ec.total + 1e-10 * std::abs(ec.total));
    }
}
