#include "fnls/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "fnls/functionals.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

namespace {

double omega(int dim) { return dim == 1 ? 2.0 : 2.0 * std::numbers::pi; }

FitResult least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
    }
    FitResult f;
    const double det = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    double ss_res = 0, ss_tot = 0;
    const double ym = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = f.intercept + f.slope * xs[i];
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - ym) * (ys[i] - ym);
    }
    f.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

std::vector<const SweepRecord*> last_converged(const std::vector<SweepRecord>& records,
                                               std::size_t count) {
    std::vector<const SweepRecord*> sel;
    for (const auto& r : records)
        if (r.converged) sel.push_back(&r);
    std::sort(sel.begin(), sel.end(),
              [](const SweepRecord* a, const SweepRecord* b) { return a->a < b->a; });
    if (sel.size() > count) sel.erase(sel.begin(), sel.end() - static_cast<long>(count));
    return sel;
}

// Reference profile lambda^{d/2} Q(lambda x) evaluated on the working grid.
Field reference_profile(const Field& Q, double lambda, const Grid& grid) {
    std::vector<std::vector<double>> targets(static_cast<std::size_t>(grid.dim));
    for (int ax = 0; ax < grid.dim; ++ax) {
        targets[static_cast<std::size_t>(ax)].resize(static_cast<std::size_t>(grid.n));
        for (int j = 0; j < grid.n; ++j)
            targets[static_cast<std::size_t>(ax)][static_cast<std::size_t>(j)] =
                lambda * grid.coord(j);
    }
    auto vals = interpolate_tensor(Q, targets);
    Field out(grid, true);
    const double amp = std::pow(lambda, 0.5 * grid.dim);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = amp * vals[i].real();
    return out;
}

double l2_distance(const Field& a, const Field& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a.values[i] - b.values[i]);
    return std::sqrt(sum * a.grid.cell_volume());
}

}  // namespace

MomentReport weighted_moment(double p, const Field& Q) {
    const Grid& g = Q.grid;
    const double mq = mass(Q);
    if (!(mq > 0)) throw std::invalid_argument("weighted_moment: zero field");
    const double rcut = 0.25 * g.length;
    double mom = 0.0;
    for (std::size_t i = 0; i < Q.size(); ++i) {
        const double r2 = g.radius_sq(i);
        if (r2 <= rcut * rcut)
            mom += std::pow(r2, 0.5 * p) * std::norm(Q.values[i]);
    }
    mom *= g.cell_volume() / mq;

    const double r_lo = std::max(8.0 * g.spacing(), g.length / 25.0);
    const double r_hi = g.length / 8.0;
    auto fit = decay_fit(Q, r_lo, r_hi);
    const double expo = p + 2.0 * fit.exponent + g.dim;
    if (expo >= 0.0)
        throw std::invalid_argument("weighted_moment: fitted decay too slow for the "
                                    "p-th moment tail (p too close to d+4s)");
    const double amp2 = fit.prefactor * fit.prefactor;
    const double tail = omega(g.dim) * amp2 * std::pow(rcut, expo) / (-expo) / mq;

    MomentReport rep;
    rep.moment = mom + tail;
    rep.tail_correction = tail;
    rep.decay_exponent = fit.exponent;
    return rep;
}

double lambda0(double kappa, double p, double s, const Field& Q) {
    const int d = Q.grid.dim;
    if (!(kappa > 0)) throw std::invalid_argument("lambda0: kappa must be positive");
    if (!(p > 0) || !(p < d + 4.0 * s))
        throw std::invalid_argument("lambda0: p must lie in (0, d+4s)");
    auto mom = weighted_moment(p, Q);
    if (mom.tail_correction > 0.1 * mom.moment)
        throw std::invalid_argument("lambda0: tail correction exceeds 10% of the moment; "
                                    "increase the ground-state domain L");
    return std::pow(kappa * p / d * mom.moment, 1.0 / (2.0 * s + p));
}

RecenterResult recenter_and_split(const Field& u_a) {
    auto peak = density_peak(u_a);
    RecenterResult out;
    out.x_a.resize(peak.size());
    out.z_a.resize(peak.size());
    std::vector<double> neg(peak.size());
    for (std::size_t i = 0; i < peak.size(); ++i) {
        const double z = std::floor(peak[i]);
        out.z_a[i] = static_cast<long>(z);
        out.x_a[i] = peak[i] - z;
        neg[i] = -peak[i];
    }
    out.centered = shift(u_a, neg);
    return out;
}

Field rescaled_profile(const Field& u_centered, double beta, double p, double s) {
    if (!(beta > 0) || beta > 1.0)
        throw std::invalid_argument("rescaled_profile: beta must lie in (0,1]");
    const double lam = std::pow(beta, 1.0 / (2.0 * s + p));
    if (lam == 1.0) return u_centered;
    DilateInfo info;
    Field w = dilate(u_centered, lam, &info);
    if (info.aliasing_risk)
        throw std::invalid_argument("rescaled_profile: window under-resolved; increase N to "
                                    "at least " + std::to_string(2 * u_centered.grid.n));
    return w;
}

FitResult fit_energy_exponent(const std::vector<SweepRecord>& records) {
    auto sel = last_converged(records, 5);
    if (sel.size() < 5)
        throw std::invalid_argument("fit_energy_exponent: need at least 5 converged records");
    std::vector<double> xs, ys;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto* r : sel) {
        const double v = r->energy / r->a;
        if (!(v > 0))
            throw std::invalid_argument("fit_energy_exponent: I(a)/a must be positive");
        if (v > prev + 1e-6)
            throw std::invalid_argument("fit_energy_exponent: non-monotone energies, fit refused");
        prev = v;
        xs.push_back(std::log(r->beta));
        ys.push_back(std::log(v));
    }
    return least_squares(xs, ys);
}

KineticFit fit_kinetic_exponent(const std::vector<SweepRecord>& records, double s, double p) {
    auto sel = last_converged(records, 5);
    if (sel.size() < 5)
        throw std::invalid_argument("fit_kinetic_exponent: need at least 5 converged records");
    KineticFit out;
    const int d = sel.front()->x_a.size() == 2 ? 2 : 1;
    out.alpha = 4.0 * s / d;
    std::vector<double> xs, ys;
    out.c3 = 0.0;
    out.c4 = std::numeric_limits<double>::infinity();
    const double w = 2.0 * s / (2.0 * s + p);
    for (const auto* r : sel) {
        const double half_norm_sq = 2.0 * r->kinetic;
        xs.push_back(std::log(r->beta));
        ys.push_back(std::log(half_norm_sq / r->a));
        out.c3 = std::max(out.c3, half_norm_sq / r->a * std::pow(r->beta, w));
        const double lp_power = r->nonlinear * (out.alpha + 2.0);
        out.c4 = std::min(out.c4, lp_power / std::pow(r->a, 2.0 * s / d + 1.0) *
                                      std::pow(r->beta, w));
    }
    out.fit = least_squares(xs, ys);
    return out;
}

EnergyLimitResult critical_energy_limit(const std::vector<SweepRecord>& records,
                                        double half_min_v, double p, double s, double c2,
                                        double margin) {
    auto sel = last_converged(records, records.size());
    if (sel.empty())
        throw std::invalid_argument("critical_energy_limit: no converged records");
    EnergyLimitResult out;
    out.decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    bool positive = true;
    for (const auto* r : sel) {
        const double v = r->energy / r->a - half_min_v;
        if (v > prev + 1e-6) out.decreasing = false;
        if (!(v > 0)) positive = false;
        prev = v;
    }
    const auto* last = sel.back();
    out.limit_estimate = last->energy / last->a;
    out.bounded = (last->energy / last->a - half_min_v) <=
                  margin * c2 * std::pow(last->beta, p / (2.0 * s + p));
    out.passes = out.decreasing && positive && out.bounded;
    return out;
}

namespace {

struct RecordContext {
    const SweepConfig* cfg;
    const Field* Q;
    double a_star;
    double lambda0_pred;
    double alpha;
};

SweepRecord compute_record(const RecordContext& ctx, double a, int start_n,
                           const Field* warm_start, Field* minimizer_out, int* n_out,
                           Field* profile_out = nullptr) {
    const SweepConfig& cfg = *ctx.cfg;
    int n = start_n;
    SweepRecord rec;
    rec.a = a;
    rec.beta = 1.0 - std::pow(a / ctx.a_star, 2.0 * cfg.s / cfg.dim);

    Field u;
    SolveReport rep;
    while (true) {
    	Grid grid = make_grid(cfg.dim, n, cfg.grid_length);
        Field V = sample_potential(cfg.potential, grid);
        auto wells = well_positions(cfg.potential, grid);
        std::vector<Field> extra;
        if (warm_start) {
            Field w = *warm_start;
            if (w.grid.n < n) w = regrid(w, grid);
            scale_to_mass(w, a);
            extra.push_back(std::move(w));
        }
        SolverConfig scfg = cfg.solver;
        if (!extra.empty()) {
            // Warm-started records keep one wide well seed as the
            // alternative-branch probe; the warm start owns the
            // concentrated branch.
            scfg.init.count = 0;
            scfg.narrow_well_starts = false;
            scfg.max_well_starts = 1;
        }
        auto res = multistart_minimize(grid, cfg.s, ctx.alpha, &V, a, scfg, &wells,
                                       extra.empty() ? nullptr : &extra);
        u = std::move(res.minimizer);
        rep = res.report;

        // Nyquist kinetic capacity rule: refine while the minimizer carries
        // more than a quarter of (1/2) a k_nyq^{2s}.
        const double cap = 0.5 * a * std::pow(grid.nyquist_wavenumber(), 2.0 * cfg.s);
        const bool need_refine =
            (rep.energy.kinetic > 0.25 * cap || rep.top_octave > 1e-8) && 2 * n <= cfg.max_grid_n;
        if (!need_refine) break;
        n *= 2;
    }

    rec.converged = rep.converged;
    rec.energy = rep.energy.total;
    rec.kinetic = rep.energy.kinetic;
    rec.potential_integral = 2.0 * rep.energy.potential;
    rec.nonlinear = rep.energy.nonlinear;
    rec.eps = std::pow(2.0 * rec.kinetic, -0.5 / cfg.s);
    rec.grid_n = n;
    rec.grid_len = cfg.grid_length;

    if (rep.converged) {
        auto rc = recenter_and_split(u);
        rec.x_a = rc.x_a;
        rec.z_a = rc.z_a;
        Field w = rescaled_profile(rc.centered, rec.beta, cfg.potential.p, cfg.s);
        Field ref = reference_profile(*ctx.Q, ctx.lambda0_pred, w.grid);
        rec.profile_l2 = l2_distance(w, ref);
        Field diff(w.grid, true);
        for (std::size_t i = 0; i < w.size(); ++i)
            diff.values[i] = w.values[i] - ref.values[i];
        rec.profile_hs = std::sqrt(rec.profile_l2 * rec.profile_l2 +
                                   half_frac_norm_sq(diff, cfg.s));
        if (profile_out) *profile_out = std::move(w);
        if (minimizer_out) *minimizer_out = std::move(u);
    } else {
        rec.x_a.assign(static_cast<std::size_t>(cfg.dim), 0.0);
        rec.z_a.assign(static_cast<std::size_t>(cfg.dim), 0);
        if (minimizer_out) *minimizer_out = std::move(u);
    }
    if (n_out) *n_out = n;
    return rec;
}

double golden_section_lambda(const Field& w, const Field& Q, double lo, double hi) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    auto dist = [&](double lam) {
        Field ref = reference_profile(Q, lam, w.grid);
        return l2_distance(w, ref);
    };
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = dist(c), fd = dist(d);
    for (int it = 0; it < 60 && (b - a) > 1e-10 * hi; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = dist(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = dist(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
    if (cfg.schedule_j.empty() && cfg.masses.empty())
        throw std::invalid_argument("run_sweep: empty mass schedule");
    if (cfg.potential.kind != PotentialKind::periodic_power)
        throw std::invalid_argument("run_sweep: the blow-up study needs a periodic power-law well");
    validate_potential_spec(cfg.potential, cfg.dim, cfg.s);
    const double alpha = 4.0 * cfg.s / cfg.dim;
    require_admissible_alpha(cfg.dim, cfg.s, alpha);

    SweepResult out;

    // Reference ground state and the predicted profile scale.
    Grid qgrid = make_grid(cfg.dim, cfg.q_grid_n, cfg.q_grid_length);
    SolverConfig qcfg = cfg.solver;
    qcfg.tol_grad = std::min(cfg.solver.tol_grad, 1e-8);
    qcfg.max_iter = std::max<long>(cfg.solver.max_iter, 50000);
    qcfg.init = InitSpec{};
    auto [Q, qrep] = petviashvili(qgrid, cfg.s, alpha, qcfg);
    if (!qrep.converged)
        throw std::runtime_error("run_sweep: reference ground state did not converge");
    out.q_reference = std::move(Q);
    out.summary.a_star = mass(out.q_reference);
    out.summary.lambda0_predicted =
        lambda0(cfg.potential.kappa, cfg.potential.p, cfg.s, out.q_reference);

    std::vector<double> masses = cfg.masses;
    if (masses.empty())
        for (int j : cfg.schedule_j)
            masses.push_back(out.summary.a_star * (1.0 - std::pow(2.0, -j)));
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0) || !(masses[i] < out.summary.a_star))
            throw std::invalid_argument("run_sweep: schedule masses must lie in (0, a*)");
        if (i > 0 && !(masses[i] > masses[i - 1]))
            throw std::invalid_argument("run_sweep: schedule must be strictly increasing");
    }

    RecordContext ctx{&cfg, &out.q_reference, out.summary.a_star,
                      out.summary.lambda0_predicted, alpha};
    out.records.resize(masses.size());

    const int threads = std::max(1, cfg.threads);
    std::vector<Field> profiles(masses.size());
    if (threads == 1) {
        Field warm;
        bool have_warm = false;
        int n = cfg.grid_n;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            SweepConfig rcfg = cfg;
            rcfg.solver.rng_seed = cfg.solver.rng_seed + 7919 * (i + 1);
            RecordContext rctx = ctx;
            rctx.cfg = &rcfg;
            Field minimizer;
            out.records[i] = compute_record(rctx, masses[i], n,
                                            cfg.continuation && have_warm ? &warm : nullptr,
                                            &minimizer, &n, &profiles[i]);
            if (out.records[i].converged) {
                warm = std::move(minimizer);
                have_warm = true;
            }
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= masses.size()) return;
                    SweepConfig rcfg = cfg;
                    rcfg.solver.rng_seed = cfg.solver.rng_seed + 7919 * (i + 1);
                    RecordContext rctx = ctx;
                    rctx.cfg = &rcfg;
                    out.records[i] = compute_record(rctx, masses[i], cfg.grid_n, nullptr,
                                                    nullptr, nullptr, &profiles[i]);
                }
            });
        for (auto& th : pool) th.join();
    }

    // Fits over the completed record list (sorted by a by construction).
    auto sel = last_converged(out.records, 5);
    if (sel.size() < 5) {
        out.summary.partial = true;
        out.summary.note += "fewer than 5 converged records; fits skipped; ";
        return out;
    }
    try {
        out.summary.energy_fit = fit_energy_exponent(out.records);
        auto kin = fit_kinetic_exponent(out.records, cfg.s, cfg.potential.p);
        out.summary.kinetic_fit = kin.fit;
        out.summary.c3 = kin.c3;
        out.summary.c4 = kin.c4;
    } catch (const std::exception& e) {
        out.summary.partial = true;
        out.summary.note += std::string("fit failure: ") + e.what() + "; ";
    }

    // One-parameter profile fit on the last converged record.
    const SweepRecord* last = sel.back();
    for (std::size_t i = 0; i < out.records.size(); ++i)
        if (&out.records[i] == last) out.last_profile = std::move(profiles[i]);
    out.summary.lambda0_fitted =
        golden_section_lambda(out.last_profile, out.q_reference,
                              0.5 * out.summary.lambda0_predicted,
                              2.0 * out.summary.lambda0_predicted);
    return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& records, int dim) {
    std::string csv = "a,beta_a,eps_a,energy,kinetic,potential_integral,nonlinear";
    for (int ax = 0; ax < dim; ++ax) csv += ",x_a_" + std::to_string(ax);
    for (int ax = 0; ax < dim; ++ax) csv += ",z_a_" + std::to_string(ax);
    csv += ",profile_l2_dist,profile_hs_dist,grid_N,grid_L,converged\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        csv += num(r.a) + "," + num(r.beta) + "," + num(r.eps) + "," + num(r.energy) + "," +
               num(r.kinetic) + "," + num(r.potential_integral) + "," + num(r.nonlinear);
        for (int ax = 0; ax < dim; ++ax) csv += "," + num(r.x_a[static_cast<std::size_t>(ax)]);
        for (int ax = 0; ax < dim; ++ax)
            csv += "," + std::to_string(r.z_a[static_cast<std::size_t>(ax)]);
        csv += "," + num(r.profile_l2) + "," + num(r.profile_hs) + "," +
               std::to_string(r.grid_n) + "," + num(r.grid_len) + "," +
               (r.converged ? "1" : "0") + "\n";
    }
    return csv;
}

}  // namespace fnls
