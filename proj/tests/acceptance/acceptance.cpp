// Acceptance suite: one pass/fail line per criterion, exit code equal to the
// number of failures. Shared heavy artifacts (reference ground states, mass
// sweeps) are computed once and reused across criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "fnls/blowup.hpp"
#include "fnls/field_io.hpp"
#include "fnls/functionals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/report.hpp"
#include "fnls/rng.hpp"
#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

using Clock = std::chrono::steady_clock;

struct Harness {
    int failures = 0;
    Clock::time_point t0 = Clock::now();

    void report(int id, const std::string& what, bool ok, const std::string& detail) {
        const double t = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s  (%s; t=%.0fs)\n", ok ? "PASS" : "FAIL", id,
                    what.c_str(), detail.c_str(), t);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

double sup_rel_err_window(const Field& q, double window) {
    double err_sup = 0, exact_sup = 0;
    for (int i = 0; i < q.grid.n; ++i) {
        const double x = q.grid.coord(i);
        if (std::abs(x) <= window) {
            const double exact = 2.0 / (1.0 + x * x);
            err_sup = std::max(err_sup, std::abs(q.values[static_cast<std::size_t>(i)].real() - exact));
            exact_sup = std::max(exact_sup, exact);
        }
    }
    return err_sup / exact_sup;
}

PotentialSpec canonical_well(double kappa, double p) {
    PotentialSpec spec;
    spec.kind = PotentialKind::periodic_power;
    spec.kappa = kappa;
    spec.p = p;
    spec.x0 = {0.5};
    return spec;
}

SweepConfig sweep_base(double kappa, double p, std::vector<int> js, int n, double L) {
    SweepConfig cfg;
    cfg.dim = 1;
    cfg.s = 0.5;
    cfg.potential = canonical_well(kappa, p);
    cfg.schedule_j = std::move(js);
    cfg.grid_n = n;
    cfg.grid_length = L;
    cfg.max_grid_n = 65536;
    cfg.q_grid_n = 32768;
    cfg.q_grid_length = 1024.0;
    cfg.solver.tol_grad = 1e-7;
    cfg.solver.init.count = 1;
    cfg.solver.init.width = 0.5;
    cfg.solver.max_well_starts = 1;
    cfg.continuation = true;
    return cfg;
}

double cell_distance(double x, double y) {
    double d = std::abs(x - y);
    return std::min(d, 1.0 - d);
}

}  // namespace

int main() {
    Harness h;

    // ---- shared artifacts -------------------------------------------------
    SolverConfig qcfg;
    qcfg.tol_grad = 1e-8;

    // alpha = 1 ground state (explicit soliton case)
    auto [q_bo, rep_bo] = petviashvili(make_grid(1, 8192, 256.0), 0.5, 1.0, qcfg);

    // mass-critical ground state (alpha = 2)
    auto [q_cr, rep_cr] = petviashvili(make_grid(1, 8192, 256.0), 0.5, 2.0, qcfg);
    const double a_star = mass(q_cr);

    // ---- 1. exact-soliton oracle ------------------------------------------
    {
        const double sup_err = sup_rel_err_window(q_bo, 20.0);
        const bool ok = rep_bo.converged && sup_err <= 1e-2 && rep_bo.residual <= 1e-6;
        h.report(1, "explicit-soliton oracle (s=1/2, alpha=1)", ok,
                 fmt("sup_rel_err=%.2e residual=%.1e", sup_err, rep_bo.residual));
    }

    // ---- 2. Pohozaev identities --------------------------------------------
    {
        bool ok = true;
        std::string detail;
        auto check_pair = [&](const Field& q, double s, double alpha, const char* tag) {
            auto po = pohozaev_check(q, s, alpha);
            const double tol = 1e-3 + boundary_tail_fraction(q);
            ok = ok && po.r1 <= tol && po.r2 <= tol;
            detail += fmt("%s r1=%.1e r2=%.1e ", tag, po.r1, po.r2);
        };
        check_pair(q_bo, 0.5, 1.0, "(.5,1)");
        check_pair(q_cr, 0.5, 2.0, "(.5,2)");
        auto [q3, rep3] = petviashvili(make_grid(1, 8192, 256.0), 0.7, 2.8, qcfg);
        ok = ok && rep3.converged;
        check_pair(q3, 0.7, 2.8, "(.7,2.8)");
        auto [q2d, rep2d] = petviashvili(make_grid(2, 512, 64.0), 0.5, 1.0, qcfg);
        ok = ok && rep2d.converged;
        check_pair(q2d, 0.5, 1.0, "2d(.5,1)");
        h.report(2, "Pohozaev identities across (s,alpha) and d=2", ok, detail);
    }

    // ---- 3. sharpness of the interpolation constant ------------------------
    {
        const double jq = weinstein(q_cr, 0.5, 2.0);
        int violations = 0;
        double worst = 1e300;
        for (int k = 0; k < 100; ++k) {
            Field v = random_smooth_field(q_cr.grid, 1000 + k);
            const double jv = weinstein(v, 0.5, 2.0);
            worst = std::min(worst, jv / jq);
            if (jv < jq * (1.0 - 1e-3)) ++violations;
        }
        h.report(3, "sharpness over 100 random smooth fields", violations == 0,
                 fmt("violations=%d min J(v)/J(Q)=%.6f", violations, worst));
    }

    // ---- 4. trichotomy without potential -----------------------------------
    {
        bool ok = true;
        std::string detail;

        // subcritical: minimizers exist with negative energy
        for (double a : {0.5, 1.0, 5.0}) {
            SolverConfig cfg;
            cfg.tol_grad = 1e-7;
            cfg.init.count = 1;
            auto res = multistart_minimize(make_grid(1, 2048, 64.0), 0.5, 1.0, nullptr, a, cfg);
            ok = ok && res.report.converged && res.report.energy.total < 0.0;
            detail += fmt("I(%.1f)=%.3f ", a, res.report.energy.total);
        }

        // critical below a*: energy stays nonnegative along the flow (up to
        // the torus floor) and the concentration family brackets 0
        {
            Grid g = make_grid(1, 8192, 1024.0);
            SolverConfig cfg;
            cfg.tol_grad = 1e-9;
            cfg.max_iter = 20000;
            cfg.check_gradient = false;
            Field seed = make_gaussian(g, 2.0, {0.0});
            const double a = 0.9 * a_star;
            scale_to_mass(seed, a);

            // monitor the energy along the flow in chunks
            double min_energy = 1e300;
            Field u = seed;
            SolverConfig chunk = cfg;
            chunk.max_iter = 2000;
            for (int leg = 0; leg < 10; ++leg) {
                auto [u2, rep] = normalized_gradient_flow(g, 0.5, 2.0, nullptr, a, chunk, &u);
                u = std::move(u2);
                min_energy = std::min(min_energy, rep.energy.total);
                if (rep.converged || rep.diverged) break;
            }
            ok = ok && min_energy >= -1e-2;

            double tau_min_e = 1e300;
            for (double tau = 1.0; tau >= 1.0 / 64.0; tau *= 0.5) {
                auto tf = test_function_energy(a, tau, {0.0}, q_cr, nullptr, 0.5, 2.0, g);
                tau_min_e = std::min(tau_min_e, tf.energy.total);
            }
            ok = ok && std::abs(tau_min_e) <= 1e-2;
            detail += fmt("flowE_min=%.2e inf_tau E=%.2e ", min_energy, tau_min_e);
        }

        // critical above a* and supercritical: unbounded-below witnesses
        {
            SolverConfig cfg;
            cfg.tol_grad = 1e-8;
            auto crit = unboundedness_witness(make_grid(1, 16384, 64.0), 0.5, 2.0, nullptr,
                                              1.1 * a_star, cfg);
            auto sup = unboundedness_witness(make_grid(1, 32768, 32.0), 0.5, 3.0, nullptr,
                                             2.0, cfg);
            ok = ok && crit.verdict == WitnessVerdict::unbounded_below &&
                 sup.verdict == WitnessVerdict::unbounded_below;
            detail += fmt("crit=%s sup=%s",
                          crit.verdict == WitnessVerdict::unbounded_below ? "unbounded" : "?",
                          sup.verdict == WitnessVerdict::unbounded_below ? "unbounded" : "?");
        }
        h.report(4, "existence trichotomy without potential", ok, detail);
    }

    // ---- 5. polynomial decay law -------------------------------------------
    {
        auto fit = decay_fit(q_cr, 10.0, q_cr.grid.length / 8.0);
        const double target = -2.0;  // -(d + 2s)
        const bool ok = std::abs(fit.exponent - target) <= 0.15 * std::abs(target);
        h.report(5, "ground-state tail exponent -(d+2s)", ok,
                 fmt("exponent=%.3f target=%.1f n=%d", fit.exponent, target, fit.n_points));
    }

    // ---- 6. critical energy limit with the kappa=1 well --------------------
    {
        auto cfg = sweep_base(1.0, 2.0, {8, 9, 10, 11, 12}, 8192, 128.0);
        auto sw = run_sweep(cfg);
        bool ok = !sw.summary.partial;
        double c2 = std::exp(sw.summary.energy_fit.intercept);
        EnergyLimitResult lim{};
        if (ok) {
            lim = critical_energy_limit(sw.records, 0.0, 2.0, 0.5, c2, 2.0);
            ok = lim.passes;
        }
        Grid vg = make_grid(1, 2048, 16.0);
        Field V = sample_potential(cfg.potential, vg);
        SolverConfig scfg;
        scfg.tol_grad = 1e-9;
        auto v2 = validate_v2(V, 0.5, scfg);
        ok = ok && v2.holds && v2.margin > 0.0;
        h.report(6, "I(a)/a -> (1/2)min V from above (kappa=1 well)", ok,
                 fmt("last I/a=%.4e decreasing=%d bounded=%d v2_margin=%.3f",
                     lim.limit_estimate, lim.decreasing, lim.bounded, v2.margin));
    }

    // ---- 7+8+9. blow-up scaling sweeps --------------------------------------
    SweepResult sw2;  // p = 2 sweep reused by 8 and 9
    {
        auto cfg2 = sweep_base(20.0, 2.0, {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, 4096, 32.0);
        sw2 = run_sweep(cfg2);
        const double slope2 = sw2.summary.energy_fit.slope;

        auto cfg1 = sweep_base(20.0, 1.0, {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, 16384, 32.0);
        auto sw1 = run_sweep(cfg1);
        const double slope1 = sw1.summary.energy_fit.slope;

        const bool ok = !sw2.summary.partial && !sw1.summary.partial &&
                        std::abs(slope2 - 2.0 / 3.0) <= 0.07 &&
                        std::abs(slope1 - 0.5) <= 0.07;
        h.report(7, "I(a)/a ~ beta^{p/(2s+p)} scaling exponents", ok,
                 fmt("slope(p=2)=%.4f [2/3] slope(p=1)=%.4f [1/2]", slope2, slope1));
    }

    {
        const double slope_k = sw2.summary.kinetic_fit.slope;
        bool eps_decreasing = true;
        const SweepRecord* prev = nullptr;
        for (const auto& r : sw2.records) {
            if (!r.converged) continue;
            if (prev && !(r.eps < prev->eps)) eps_decreasing = false;
            prev = &r;
        }
        const bool ok = std::abs(slope_k + 1.0 / 3.0) <= 0.07 && eps_decreasing;
        h.report(8, "kinetic blow-up exponent and shrinking eps_a", ok,
                 fmt("slope=%.4f [-1/3] eps_decreasing=%d", slope_k, eps_decreasing));
    }

    {
        const SweepRecord* last = nullptr;
        for (const auto& r : sw2.records)
            if (r.converged) last = &r;
        bool ok = last != nullptr;
        std::string detail = "no converged record";
        if (last) {
            const double lam_rel =
                std::abs(sw2.summary.lambda0_fitted - sw2.summary.lambda0_predicted) /
                sw2.summary.lambda0_predicted;
            const double xd = cell_distance(last->x_a[0], 0.5);
            ok = last->profile_l2 <= 0.1 * std::sqrt(sw2.summary.a_star) &&
                 lam_rel <= 0.1 && xd <= 0.05;
            detail = fmt("profile_l2=%.4f (cap %.4f) lambda_rel=%.3f x_dist=%.4f",
                         last->profile_l2, 0.1 * std::sqrt(sw2.summary.a_star), lam_rel, xd);
        }
        h.report(9, "rescaled profiles converge to the predicted shape", ok, detail);
    }

    // ---- 10. infrastructure determinism -------------------------------------
    {
        bool ok = true;
        std::string detail;

        // byte-identical repeated runs (multistart with random seeds included)
        Grid g = make_grid(1, 1024, 16.0);
        PotentialSpec spec = canonical_well(20.0, 2.0);
        Field V = sample_potential(spec, g);
        auto wells = well_positions(spec, g);
        SolverConfig cfg;
        cfg.tol_grad = 1e-7;
        cfg.init.count = 2;
        cfg.rng_seed = 1234;
        auto r1 = multistart_minimize(g, 0.5, 2.0, &V, 1.8, cfg, &wells);
        auto r2 = multistart_minimize(g, 0.5, 2.0, &V, 1.8, cfg, &wells);
        bool identical = r1.report.iterations == r2.report.iterations &&
                         r1.report.energy.total == r2.report.energy.total;
        for (std::size_t i = 0; identical && i < r1.minimizer.size(); ++i)
            identical = r1.minimizer.values[i] == r2.minimizer.values[i];
        ok = ok && identical;
        detail += fmt("rerun_identical=%d ", identical);

        // bit-exact field round trip
        const std::string path = "acceptance_roundtrip.field";
        write_field(path, r1.minimizer, 0.5);
        Field back = read_field(path);
        bool bits = back.size() == r1.minimizer.size();
        for (std::size_t i = 0; bits && i < back.size(); ++i)
            bits = back.values[i].real() == r1.minimizer.values[i].real();
        ok = ok && bits;
        detail += fmt("roundtrip_bits=%d ", bits);
        std::remove(path.c_str());

        // finite-difference consistency of the descent direction
        ok = ok && r1.report.grad_check_max_rel <= 1e-6;
        detail += fmt("grad_fd_rel=%.2e", r1.report.grad_check_max_rel);
        h.report(10, "determinism, persistence, gradient consistency", ok, detail);
    }

    std::printf("%d criterion(s) failed\n", h.failures);
    return h.failures;
}
