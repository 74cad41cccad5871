#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnls/blowup.hpp"
#include "fnls/config.hpp"
#include "fnls/field_io.hpp"
#include "fnls/functionals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/report.hpp"
#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitDiverged = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int env_thread_cap() {
    const char* env = std::getenv("FNLS_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return v > 0 ? v : 1;
}

struct FlagOverrides {
    std::optional<int> d;
    std::optional<double> s;
    std::optional<std::string> alpha;
    std::optional<std::string> a;
    std::optional<int> n;
    std::optional<double> length;
    std::optional<std::string> kind;
    std::optional<double> kappa;
    std::optional<double> p;
    std::vector<double> x0;
    std::optional<double> dt;
    std::optional<double> tol_grad;
    std::optional<long> max_iter;
    std::optional<double> width;
    std::optional<int> count;
    std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--d", f.d, "dimension (1 or 2)");
    cmd->add_option("--s", f.s, "fractional order in (0,1)");
    cmd->add_option("--alpha", f.alpha, "nonlinearity exponent or \"critical\"");
    cmd->add_option("--a", f.a, "mass: number, \"a_star\" or \"<c>*a_star\"");
    cmd->add_option("--N", f.n, "grid points per axis (power of two)");
    cmd->add_option("--L", f.length, "torus side length");
    cmd->add_option("--potential-kind", f.kind, "zero | periodic_power");
    cmd->add_option("--kappa", f.kappa, "well strength");
    cmd->add_option("--p", f.p, "well exponent, 0 < p < d+4s");
    cmd->add_option("--x0", f.x0, "well location in [0,1)^d");
    cmd->add_option("--dt", f.dt, "flow step");
    cmd->add_option("--tol-grad", f.tol_grad, "residual tolerance");
    cmd->add_option("--max-iter", f.max_iter, "iteration cap");
    cmd->add_option("--width", f.width, "initial Gaussian width");
    cmd->add_option("--starts", f.count, "random multistart count");
    cmd->add_option("--seed", f.seed, "rng seed");
}

fnls::RunConfig make_config(const std::string& config_path, const FlagOverrides& f) {
    fnls::RunConfig cfg;
    if (!config_path.empty()) cfg = fnls::parse_config(config_path);
    if (f.d) cfg.dim = *f.d;
    if (f.s) cfg.s = *f.s;
    if (f.alpha) {
        if (*f.alpha == "critical") cfg.alpha = fnls::AlphaSpec{true, 0.0};
        else cfg.alpha = fnls::AlphaSpec{false, std::stod(*f.alpha)};
    }
    if (f.a) {
        const std::string& raw = *f.a;
        const std::size_t star = raw.find("a_star");
        if (star != std::string::npos) {
            std::string factor = raw.substr(0, star);
            while (!factor.empty() && (factor.back() == '*' || factor.back() == ' '))
                factor.pop_back();
            cfg.a = fnls::MassSpec{true, factor.empty() ? 1.0 : std::stod(factor)};
        } else {
            cfg.a = fnls::MassSpec{false, std::stod(raw)};
        }
    }
    if (f.n) cfg.grid.n = *f.n;
    if (f.length) cfg.grid.length = *f.length;
    if (f.kind) {
        if (*f.kind == "zero") cfg.potential.kind = fnls::PotentialKind::zero;
        else if (*f.kind == "periodic_power")
            cfg.potential.kind = fnls::PotentialKind::periodic_power;
        else throw std::invalid_argument("unknown potential kind: " + *f.kind);
    }
    if (f.kappa) cfg.potential.kappa = *f.kappa;
    if (f.p) cfg.potential.p = *f.p;
    if (!f.x0.empty()) cfg.potential.x0 = f.x0;
    if (cfg.potential.kind == fnls::PotentialKind::periodic_power && cfg.potential.x0.empty())
        cfg.potential.x0.assign(static_cast<std::size_t>(cfg.dim), 0.0);
    if (f.dt) cfg.solver.dt = *f.dt;
    if (f.tol_grad) cfg.solver.tol_grad = *f.tol_grad;
    if (f.max_iter) cfg.solver.max_iter = *f.max_iter;
    if (f.width) cfg.solver.init.width = *f.width;
    if (f.count) cfg.solver.init.count = *f.count;
    if (f.seed) cfg.solver.rng_seed = *f.seed;
    fnls::validate_run_config(cfg);
    return cfg;
}

// Resolves a mass given relative to a*: computes the critical ground state
// on the requested grid.
double resolve_mass(const fnls::RunConfig& cfg) {
    if (!cfg.a.needs_a_star()) return cfg.a.value;
    const double alpha_c = 4.0 * cfg.s / cfg.dim;
    fnls::Grid grid = fnls::make_grid(cfg.dim, cfg.grid.resolved_n(cfg.dim), cfg.grid.length);
    fnls::SolverConfig qcfg = cfg.solver;
    qcfg.init = fnls::InitSpec{};
    auto [Q, rep] = fnls::petviashvili(grid, cfg.s, alpha_c, qcfg);
    if (!rep.converged)
        throw std::runtime_error("mass resolution: critical ground state did not converge");
    return cfg.a.resolve(fnls::mass(Q));
}

int cmd_groundstate(const std::string& config_path, const FlagOverrides& flags,
                    const std::string& out_path, const std::string& report_path) {
    const auto t0 = Clock::now();
    auto cfg = make_config(config_path, flags);
    const double alpha = cfg.alpha.resolve(cfg.dim, cfg.s);
    fnls::Grid grid = fnls::make_grid(cfg.dim, cfg.grid.resolved_n(cfg.dim), cfg.grid.length);
    auto [Q, rep] = fnls::petviashvili(grid, cfg.s, alpha, cfg.solver);

    nlohmann::json payload;
    payload["solve"] = fnls::to_json(rep);
    payload["alpha"] = alpha;
    payload["pohozaev"] = fnls::to_json(fnls::pohozaev_check(Q, cfg.s, alpha));
    try {
        payload["gn"] = fnls::to_json(fnls::gn_constant(Q, cfg.s, alpha));
    } catch (const fnls::NotGroundState& e) {
        payload["gn"] = {{"error", e.what()}};
    }
    payload["mass"] = fnls::mass(Q);

    if (!out_path.empty()) fnls::write_field(out_path, Q, cfg.s);
    if (!report_path.empty()) {
        auto env = fnls::make_envelope(fnls::run_config_json(cfg), seconds_since(t0),
                                       std::move(payload));
        fnls::write_json_report(report_path, env);
    }
    std::cout << (rep.converged ? "converged" : "not converged") << " in " << rep.iterations
              << " iterations, residual " << rep.residual << ", mass " << rep.mass_value
              << "\n";
    return rep.converged ? kExitOk : kExitNotConverged;
}

int cmd_minimize(const std::string& config_path, const FlagOverrides& flags,
                 const std::string& out_path, const std::string& report_path) {
    const auto t0 = Clock::now();
    auto cfg = make_config(config_path, flags);
    const double alpha = cfg.alpha.resolve(cfg.dim, cfg.s);
    const double a = resolve_mass(cfg);
    fnls::Grid grid = fnls::make_grid(cfg.dim, cfg.grid.resolved_n(cfg.dim), cfg.grid.length);

    fnls::Field V;
    const fnls::Field* v_ptr = nullptr;
    std::vector<std::vector<double>> wells;
    if (cfg.potential.kind != fnls::PotentialKind::zero) {
        V = fnls::sample_potential(cfg.potential, grid);
        v_ptr = &V;
        wells = fnls::well_positions(cfg.potential, grid);
    }
    auto res = fnls::multistart_minimize(grid, cfg.s, alpha, v_ptr, a, cfg.solver,
                                         wells.empty() ? nullptr : &wells);

    nlohmann::json payload;
    payload["solve"] = fnls::to_json(res.report);
    payload["alpha"] = alpha;
    payload["a"] = a;
    payload["best_start"] = res.best_start;
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& s : res.starts)
        starts.push_back({{"energy", s.energy}, {"converged", s.converged},
                          {"diverged", s.diverged}});
    payload["starts"] = starts;

    if (!out_path.empty() && res.report.converged)
        fnls::write_field(out_path, res.minimizer, cfg.s);
    if (!report_path.empty()) {
        auto env = fnls::make_envelope(fnls::run_config_json(cfg), seconds_since(t0),
                                       std::move(payload));
        fnls::write_json_report(report_path, env);
    }
    if (res.report.converged) {
        std::cout << "I(a) = " << res.report.energy.total << " at a = " << a << "\n";
        return kExitOk;
    }
    if (res.all_diverged || res.report.diverged) {
        std::cout << "diverged: the constrained infimum appears unbounded below\n";
        return kExitDiverged;
    }
    std::cout << "not converged\n";
    return kExitNotConverged;
}

int cmd_spectrum(const std::string& config_path, const FlagOverrides& flags,
                 const std::string& report_path) {
    const auto t0 = Clock::now();
    auto cfg = make_config(config_path, flags);
    fnls::Grid grid = fnls::make_grid(cfg.dim, cfg.grid.resolved_n(cfg.dim), cfg.grid.length);
    fnls::Field V = fnls::sample_potential(cfg.potential, grid);
    auto v2 = fnls::validate_v2(V, cfg.s, cfg.solver);

    nlohmann::json payload = fnls::to_json(v2);
    if (cfg.potential.kind == fnls::PotentialKind::periodic_power) {
        auto fit = fnls::validate_v3(cfg.potential, grid);
        payload["v3_fit"] = {{"p_hat", fit.p_hat}, {"kappa_hat", fit.kappa_hat}};
    }
    if (!report_path.empty()) {
        auto env = fnls::make_envelope(fnls::run_config_json(cfg), seconds_since(t0),
                                       std::move(payload));
        fnls::write_json_report(report_path, env);
    }
    std::cout << "inf sigma((-Delta)^s + V) ~ " << v2.bottom << " (min V = " << v2.min_v
              << ", margin " << v2.margin << ")\n";
    return kExitOk;
}

int cmd_check(const std::string& section, const std::string& field_path,
              std::optional<double> s_flag, std::optional<std::string> alpha_flag,
              const std::string& report_path) {
    fnls::FieldFileInfo info;
    fnls::Field u = fnls::read_field(field_path, &info);
    double s = s_flag ? *s_flag : (info.s_used ? *info.s_used : 0.5);
    double alpha = 4.0 * s / u.grid.dim;
    if (alpha_flag && *alpha_flag != "critical") alpha = std::stod(*alpha_flag);

    nlohmann::json payload;
    payload["mass"] = fnls::mass(u);
    payload["s"] = s;
    payload["alpha"] = alpha;
    const bool all = section == "all" || section.empty();
    if (all || section == "pohozaev")
        payload["pohozaev"] = fnls::to_json(fnls::pohozaev_check(u, s, alpha));
    if (all || section == "gn") {
        try {
            payload["gn"] = fnls::to_json(fnls::gn_constant(u, s, alpha));
        } catch (const fnls::NotGroundState& e) {
            payload["gn"] = {{"error", e.what()}};
        }
    }
    if (all || section == "decay") {
        const double r_hi = u.grid.length / 8.0;
        const double r_lo = std::min(10.0, 0.5 * r_hi);
        auto fit = fnls::decay_fit(u, r_lo, r_hi);
        payload["decay"] = fnls::to_json(fit);
        payload["decay"]["window"] = {r_lo, r_hi};
    }
    if (all || section == "energy")
        payload["energy"] = fnls::to_json(fnls::energy(u, nullptr, s, alpha));

    fnls::ensure_finite(payload, "check");
    std::cout << payload.dump(2) << "\n";
    if (!report_path.empty()) fnls::write_json_report(report_path, payload);
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir_flag) {
    const auto t0 = Clock::now();
    if (config_path.empty())
        throw std::invalid_argument("sweep: --config is required (mass schedules live there)");
    auto cfg = fnls::parse_config(config_path);
    auto sweep_cfg = fnls::to_sweep_config(cfg);
    sweep_cfg.threads = std::min(sweep_cfg.threads, env_thread_cap());

    std::string out_dir = out_dir_flag.empty() ? cfg.output.directory : out_dir_flag;
    std::filesystem::create_directories(out_dir);

    auto result = fnls::run_sweep(sweep_cfg);

    const auto& fmts = cfg.output.formats;
    auto has = [&](const char* f) {
        return std::find(fmts.begin(), fmts.end(), f) != fmts.end();
    };
    if (has("csv"))
        fnls::write_text_file(out_dir + "/sweep.csv",
                              fnls::sweep_csv(result.records, sweep_cfg.dim));
    if (has("json")) {
        nlohmann::json payload = fnls::to_json(result.summary);
        nlohmann::json dists = nlohmann::json::array();
        for (const auto& r : result.records)
            if (r.converged) dists.push_back(r.profile_l2);
        payload["profile_dists"] = dists;
        auto env = fnls::make_envelope(fnls::run_config_json(cfg), seconds_since(t0),
                                       std::move(payload));
        fnls::write_json_report(out_dir + "/summary.json", env);
    }
    if (has("field")) {
        fnls::write_field(out_dir + "/q_reference.field", result.q_reference, sweep_cfg.s);
        if (!result.last_profile.values.empty())
            fnls::write_field(out_dir + "/w_last.field", result.last_profile, sweep_cfg.s);
    }
    std::cout << "sweep complete: " << result.records.size() << " records, a* = "
              << result.summary.a_star << ", slope_energy = "
              << result.summary.energy_fit.slope << "\n";
    return result.summary.partial ? kExitNotConverged : kExitOk;
}

int cmd_witness(const std::string& config_path, const FlagOverrides& flags,
                const std::string& report_path) {
    const auto t0 = Clock::now();
    auto cfg = make_config(config_path, flags);
    const double alpha = cfg.alpha.resolve(cfg.dim, cfg.s);
    const double a = resolve_mass(cfg);
    fnls::Grid grid = fnls::make_grid(cfg.dim, cfg.grid.resolved_n(cfg.dim), cfg.grid.length);
    fnls::Field V;
    const fnls::Field* v_ptr = nullptr;
    if (cfg.potential.kind != fnls::PotentialKind::zero) {
        V = fnls::sample_potential(cfg.potential, grid);
        v_ptr = &V;
    }
    auto rep = fnls::unboundedness_witness(grid, cfg.s, alpha, v_ptr, a, cfg.solver);
    nlohmann::json payload = fnls::to_json(rep);
    payload["a"] = a;
    payload["alpha"] = alpha;
    if (!report_path.empty()) {
        auto env = fnls::make_envelope(fnls::run_config_json(cfg), seconds_since(t0),
                                       std::move(payload));
        fnls::write_json_report(report_path, env);
    }
    std::cout << (rep.verdict == fnls::WitnessVerdict::unbounded_below ? "unbounded-below"
                                                                       : "inconclusive")
              << (rep.branch.empty() ? "" : " via " + rep.branch) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudospectral variational toolkit for the fractional NLS with "
                 "periodic potentials"};
    app.require_subcommand(1);

    std::string config_path, out_path, report_path, out_dir, section, field_path;
    FlagOverrides flags;
    std::optional<double> s_flag;
    std::optional<std::string> alpha_flag;

    auto* gs = app.add_subcommand("groundstate", "compute Q_alpha by the stabilized "
                                                 "fixed-point iteration");
    gs->add_option("--config", config_path, "TOML config");
    add_common_flags(gs, flags);
    gs->add_option("--out", out_path, "output .field path");
    gs->add_option("--report", report_path, "JSON report path");

    auto* mi = app.add_subcommand("minimize", "single mass-constrained minimization");
    mi->add_option("--config", config_path, "TOML config");
    add_common_flags(mi, flags);
    mi->add_option("--out", out_path, "output .field path");
    mi->add_option("--report", report_path, "JSON report path");

    auto* sp = app.add_subcommand("spectrum", "spectral bottom of (-Delta)^s + V");
    sp->add_option("--config", config_path, "TOML config");
    add_common_flags(sp, flags);
    sp->add_option("--report", report_path, "JSON report path");

    auto* ck = app.add_subcommand("check", "evaluate identities on a stored field");
    std::vector<std::string> ck_args;
    ck->add_option("args", ck_args, "[section] field-file")->expected(1, 2);
    ck->add_option("--s", s_flag, "fractional order (default: header)");
    ck->add_option("--alpha", alpha_flag, "exponent or \"critical\"");
    ck->add_option("--report", report_path, "JSON report path");

    auto* sw = app.add_subcommand("sweep", "blow-up study a -> a*");
    sw->add_option("--config", config_path, "TOML config (required)");
    sw->add_option("--out-dir", out_dir, "output directory");

    auto* wi = app.add_subcommand("witness", "probe for unbounded-below energies");
    wi->add_option("--config", config_path, "TOML config");
    add_common_flags(wi, flags);
    wi->add_option("--report", report_path, "JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gs->parsed()) return cmd_groundstate(config_path, flags, out_path, report_path);
        if (mi->parsed()) return cmd_minimize(config_path, flags, out_path, report_path);
        if (sp->parsed()) return cmd_spectrum(config_path, flags, report_path);
        if (ck->parsed()) {
            if (ck_args.size() == 2) {
                section = ck_args[0];
                field_path = ck_args[1];
            } else {
                section = "all";
                field_path = ck_args.at(0);
            }
            return cmd_check(section, field_path, s_flag, alpha_flag, report_path);
        }
        if (sw->parsed()) return cmd_sweep(config_path, out_dir);
        if (wi->parsed()) return cmd_witness(config_path, flags, report_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
