#include "fnls/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fnls {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string config_hash(const nlohmann::json& config) {
    // nlohmann objects keep sorted keys, so dump() is already canonical
    std::ostringstream hex;
    hex << std::hex << fnv1a64(config.dump());
    return hex.str();
}

void ensure_finite(const nlohmann::json& j, const std::string& context) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v))
            throw std::runtime_error("non-finite value in report at " + context);
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            ensure_finite(it.value(), context + "/" + it.key());
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            ensure_finite(j[i], context + "/" + std::to_string(i));
    } else if (j.is_null()) {
        // nlohmann serializes NaN as null; treat as the same hard failure
        throw std::runtime_error("null (possibly NaN) value in report at " + context);
    }
}

nlohmann::json make_envelope(const nlohmann::json& config, double wall_time_s,
                             nlohmann::json payload) {
    nlohmann::json env;
    env["tool_version"] = kToolVersion;
    env["config_hash"] = config_hash(config);
    env["wall_time_s"] = wall_time_s;
    env["provenance"] = std::string("fnls ") + kToolVersion + "+" + config_hash(config);
    env["payload"] = std::move(payload);
    return env;
}

void write_json_report(const std::string& path, const nlohmann::json& report) {
    ensure_finite(report, path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json_report: cannot open " + path);
    out << report.dump(2) << '\n';
}

nlohmann::json to_json(const EnergyBreakdown& e) {
    return {{"kinetic", e.kinetic},
            {"potential", e.potential},
            {"nonlinear", e.nonlinear},
            {"total", e.total}};
}

nlohmann::json to_json(const SolveReport& r) {
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"residual", r.residual},
            {"energy", to_json(r.energy)},
            {"mass", r.mass_value},
            {"boundary_tail_fraction", r.boundary_tail},
            {"top_octave_fraction", r.top_octave},
            {"diverged", r.diverged},
            {"stalled", r.stalled},
            {"multiplier", r.multiplier},
            {"grad_check_max_rel", r.grad_check_max_rel},
            {"grid_N", r.grid_n},
            {"grid_L", r.grid_length},
            {"note", r.note}};
}

nlohmann::json to_json(const PohozaevReport& r) {
    return {{"r1", r.r1},
            {"r2", r.r2},
            {"half_norm_sq", r.half_norm_sq},
            {"mass_sq", r.mass_sq},
            {"lp_power", r.lp_power},
            {"ground_state_like", r.ground_state_like}};
}

nlohmann::json to_json(const GnConstant& g) {
    return {{"c_opt_j", g.from_weinstein},
            {"c_opt_closed", g.closed_form},
            {"rel_disagreement", g.rel_disagreement}};
}

nlohmann::json to_json(const DecayFit& d) {
    return {{"exponent", d.exponent},
            {"prefactor", d.prefactor},
            {"n_points", d.n_points},
            {"non_power_law", d.non_power_law}};
}

nlohmann::json to_json(const V2Report& r) {
    return {{"holds", r.holds},
            {"min_v", r.min_v},
            {"spectral_bottom", r.bottom},
            {"margin", r.margin},
            {"residual", r.residual}};
}

nlohmann::json to_json(const WitnessReport& r) {
    return {{"verdict", r.verdict == WitnessVerdict::unbounded_below ? "unbounded-below"
                                                                     : "inconclusive"},
            {"slope", r.slope},
            {"branch", r.branch},
            {"dilation_energies", r.dilation_energies},
            {"concentration_energies", r.concentration_energies},
            {"note", r.note}};
}

nlohmann::json to_json(const SweepSummary& s) {
    return {{"a_star", s.a_star},
            {"lambda0_predicted", s.lambda0_predicted},
            {"lambda0_fitted", s.lambda0_fitted},
            {"slope_energy", s.energy_fit.slope},
            {"c2", std::exp(s.energy_fit.intercept)},
            {"r2_energy", s.energy_fit.r2},
            {"slope_kinetic", s.kinetic_fit.slope},
            {"c3", s.c3},
            {"c4", s.c4},
            {"partial", s.partial},
            {"note", s.note}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fnls
