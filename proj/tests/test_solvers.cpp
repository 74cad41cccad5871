#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fnls/functionals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/rng.hpp"
#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double l2_diff(const Field& a, const Field& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
    return std::sqrt(s * a.grid.cell_volume());
}

// Critical (s=1/2, alpha=2) ground state on a small working grid.
struct CriticalFixture {
    Field Q;
    double a_star;
};
const CriticalFixture& critical_fixture() {
    static CriticalFixture fx = [] {
        SolverConfig cfg;
        cfg.tol_grad = 1e-9;
        auto [Q, rep] = petviashvili(make_grid(1, 2048, 64.0), 0.5, 2.0, cfg);
        REQUIRE(rep.converged);
        return CriticalFixture{std::move(Q), 0.0};
    }();
    if (fx.a_star == 0.0) fx.a_star = mass(fx.Q);
    return fx;
}

}  // namespace

TEST_CASE("petviashvili reproduces the explicit soliton") {
    Grid g = make_grid(1, 4096, 256.0);
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    auto [Q, rep] = petviashvili(g, 0.5, 1.0, cfg);
    REQUIRE(rep.converged);
    CHECK(rep.residual <= 1e-8);

    // sup-norm relative error against 2/(1+x^2) on |x| <= 20
    double err_sup = 0, exact_sup = 0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        if (std::abs(x) <= 20.0) {
            const double exact = 2.0 / (1.0 + x * x);
            err_sup = std::max(err_sup, std::abs(Q.values[i].real() - exact));
            exact_sup = std::max(exact_sup, exact);
        }
    }
    CHECK(err_sup / exact_sup <= 1e-2);

    // one extra fixed-point iteration barely moves a converged state
    const double alpha = 1.0;
    Field w(g, true);
    for (std::size_t i = 0; i < Q.size(); ++i) {
        const double m = std::abs(Q.values[i]);
        w.values[i] = std::pow(m, alpha) * Q.values[i];
    }
    const double num = mass(Q) + half_frac_norm_sq(Q, 0.5);
    double den = 0;
    for (const auto& v : Q.values) den += std::pow(std::abs(v), alpha + 2.0);
    den *= g.cell_volume();
    const double stab = std::pow(num / den, (alpha + 1.0) / alpha);
    Field next = resolvent_apply(w, 0.5, 1.0);
    for (auto& v : next.values) v *= stab;
    CHECK(l2_diff(next, Q) / std::sqrt(mass(Q)) <= 10.0 * cfg.tol_grad);

    // converged ground state satisfies the solution identities
    auto po = pohozaev_check(Q, 0.5, alpha);
    const double tail = boundary_tail_fraction(Q);
    CHECK(po.r1 <= 1e-3 + tail);
    CHECK(po.r2 <= 1e-3 + tail);

    // peak recentered at the origin
    auto peak = density_peak(Q);
    CHECK(std::abs(peak[0]) < g.spacing());
}

TEST_CASE("subcritical flow without potential: negative energy minimizer") {
    Grid g = make_grid(1, 2048, 64.0);
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    for (double a : {0.5, 1.0}) {
        auto [u, rep] = normalized_gradient_flow(g, 0.5, 1.0, nullptr, a, cfg);
        CHECK(rep.converged);
        CHECK(rep.energy.total < 0.0);
        CHECK(rel_err(rep.mass_value, a) < 1e-12);
        CHECK(rep.energy_monotone);
        CHECK(rep.grad_check_max_rel <= 1e-6);
        CHECK(rep.residual <= cfg.tol_grad);
    }
}

TEST_CASE("supercritical mass collapses and is detected") {
    const auto& fx = critical_fixture();
    Grid g = fx.Q.grid;
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    cfg.max_iter = 30000;
    auto [u, rep] = normalized_gradient_flow(g, 0.5, 2.0, nullptr, 1.05 * fx.a_star, cfg);
    CHECK(rep.diverged);
    CHECK_FALSE(rep.converged);
    CHECK(rep.top_octave > cfg.divergence_top_octave);
}

TEST_CASE("multistart without potential agrees across starts") {
    Grid g = make_grid(1, 1024, 64.0);
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    cfg.init.count = 2;
    auto res = multistart_minimize(g, 0.5, 1.0, nullptr, 1.0, cfg);
    REQUIRE(res.report.converged);
    int converged = 0;
    for (const auto& st : res.starts)
        if (st.converged) {
            ++converged;
            CHECK(rel_err(st.energy, res.report.energy.total) < 1e-6);
        }
    CHECK(converged >= 2);
}

TEST_CASE("well potential pins the minimizer to the zero set") {
    Grid g = make_grid(1, 1024, 16.0);
    PotentialSpec spec;
    spec.kind = PotentialKind::periodic_power;
    spec.kappa = 20.0;
    spec.p = 2.0;
    spec.x0 = {0.5};
    Field V = sample_potential(spec, g);
    auto wells = well_positions(spec, g);

    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    cfg.init.count = 1;
    auto res = multistart_minimize(g, 0.5, 1.0, &V, 2.0, cfg, &wells);
    REQUIRE(res.report.converged);
    auto peak = density_peak(res.minimizer);
    const double frac = peak[0] - std::floor(peak[0]);
    CHECK(std::min(std::abs(frac - 0.5), 1.0 - std::abs(frac - 0.5)) < 0.1);
}

TEST_CASE("near-critical minimizer sits in the variational bracket") {
    Grid g = make_grid(1, 8192, 16.0);
    PotentialSpec spec;
    spec.kind = PotentialKind::periodic_power;
    spec.kappa = 20.0;
    spec.p = 2.0;
    spec.x0 = {0.5};
    Field V = sample_potential(spec, g);
    auto wells = well_positions(spec, g);

    SolverConfig qcfg;
    qcfg.tol_grad = 1e-9;
    auto [Q, qrep] = petviashvili(make_grid(1, 2048, 64.0), 0.5, 2.0, qcfg);
    REQUIRE(qrep.converged);
    const double a_star = mass(Q);
    const double a = 0.998 * a_star;

    SolverConfig cfg;
    cfg.tol_grad = 1e-7;
    cfg.init.count = 1;
    cfg.init.width = 0.2;
    cfg.max_well_starts = 1;  // wells are periodic copies of each other
    auto res = multistart_minimize(g, 0.5, 2.0, &V, a, cfg, &wells);
    REQUIRE(res.report.converged);

    SolverConfig scfg;
    scfg.tol_grad = 1e-9;
    auto bottom = spectral_bottom(V, 0.5, scfg);
    REQUIRE(bottom.converged);

    // a/2 min V < I(a) < a/2 inf sigma
    CHECK(res.report.energy.total > 0.0);
    CHECK(res.report.energy.total < 0.5 * a * bottom.value);

    // the constrained infimum never exceeds the concentration upper bound
    auto [x0s, snap] = snapped_x0(spec, g);
    const std::vector<double> well{x0s[0] - std::floor(x0s[0] + 0.5) + 0.0};
    for (double tau : {4.0, 8.0, 16.0}) {
        auto tf = test_function_energy(a, tau, {0.5}, Q, &V, 0.5, 2.0, g);
        CHECK(res.report.energy.total <= tf.energy.total + 1e-10);
        CHECK(rel_err(tf.mass_value, a) < 1e-12);
    }
}

TEST_CASE("concentration profile energy tracks the predicted expansion") {
    const auto& fx = critical_fixture();
    Grid g = make_grid(1, 4096, 16.0);
    PotentialSpec spec;
    spec.kind = PotentialKind::periodic_power;
    spec.kappa = 1.0;
    spec.p = 2.0;
    spec.x0 = {0.5};
    Field V = sample_potential(spec, g);

    const double s = 0.5, d = 1.0;
    for (double beta : {0.1, 0.05}) {
        const double a = fx.a_star * std::pow(1.0 - beta, d / (2.0 * s));
        const double tau = std::pow(beta, -1.0 / (4.0 * s));
        auto tf = test_function_energy(a, tau, {0.5}, fx.Q, &V, s, 2.0, g);
        const double predicted =
            std::pow(tau, 2.0 * s) * (d / (4.0 * s)) * beta + 0.5 * 0.0;  // V(x0) = 0
        const double got = tf.energy.total / a;
        CHECK(std::abs(got - predicted) <= 0.1 * std::abs(predicted) + 0.01);
    }

    // mass pinned exactly for every tau, spreading or concentrating
    for (double tau : {0.5, 1.0, 2.0, 8.0}) {
        auto tf = test_function_energy(1.7, tau, {0.5}, fx.Q, &V, s, 2.0, g);
        CHECK(rel_err(tf.mass_value, 1.7) < 1e-12);
    }

    // under-resolved tau is rejected with a hint
    CHECK_THROWS_AS(test_function_energy(1.0, 400.0, {0.5}, fx.Q, &V, s, 2.0, g),
                    std::invalid_argument);
}

TEST_CASE("unboundedness witness: trichotomy verdicts") {
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;

    // supercritical alpha = 3 > 4s/d = 2: unbounded below for any mass;
    // small masses collapse at tiny widths and need the finer grid
    auto sup3 = unboundedness_witness(make_grid(1, 8192, 128.0), 0.5, 3.0, nullptr, 3.0, cfg);
    CHECK(sup3.verdict == WitnessVerdict::unbounded_below);
    CHECK(sup3.branch == "dilation");
    auto sup1 = unboundedness_witness(make_grid(1, 32768, 32.0), 0.5, 3.0, nullptr, 1.0, cfg);
    CHECK(sup1.verdict == WitnessVerdict::unbounded_below);
    CHECK(sup1.branch == "dilation");

    // subcritical alpha = 1: bounded below, witness stays inconclusive
    auto sub = unboundedness_witness(make_grid(1, 8192, 128.0), 0.5, 1.0, nullptr, 1.0, cfg);
    CHECK(sub.verdict == WitnessVerdict::inconclusive);

    // critical with a > a*: the concentration family certifies the collapse
    const auto& fx = critical_fixture();
    Grid gc = make_grid(1, 16384, 64.0);
    auto crit = unboundedness_witness(gc, 0.5, 2.0, nullptr, 1.2 * fx.a_star, cfg);
    CHECK(crit.verdict == WitnessVerdict::unbounded_below);
    CHECK(crit.branch == "concentration");
    auto crit2 = unboundedness_witness(gc, 0.5, 2.0, nullptr, 1.02 * fx.a_star, cfg);
    CHECK(crit2.verdict == WitnessVerdict::unbounded_below);
    CHECK(crit2.branch == "concentration");
}

TEST_CASE("flows are deterministic given the seed") {
    Grid g = make_grid(1, 512, 32.0);
    SolverConfig cfg;
    cfg.tol_grad = 1e-8;
    cfg.rng_seed = 99;
    auto [u1, r1] = normalized_gradient_flow(g, 0.5, 1.0, nullptr, 1.0, cfg);
    auto [u2, r2] = normalized_gradient_flow(g, 0.5, 1.0, nullptr, 1.0, cfg);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    CHECK(r1.iterations == r2.iterations);
    CHECK(r1.energy.total == r2.energy.total);
    bool identical = true;
    for (std::size_t i = 0; i < u1.size(); ++i)
        if (u1.values[i] != u2.values[i]) identical = false;
    CHECK(identical);
}
