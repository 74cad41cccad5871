#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/blowup.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

struct AlphaSpec {
    bool critical = true;  // resolves to 4s/d
    double value = 0.0;
    double resolve(int dim, double s) const { return critical ? 4.0 * s / dim : value; }
};

struct MassSpec {
    bool a_star_multiple = false;  // value * a_star, resolved once a* is known
    double value = 1.0;
    double resolve(double a_star) const { return a_star_multiple ? value * a_star : value; }
    bool needs_a_star() const { return a_star_multiple; }
};

struct GridConfig {
    int n = 0;  // 0 selects the documented default: 4096 (d=1), 512 (d=2)
    double length = 128.0;
    int resolved_n(int dim) const { return n > 0 ? n : (dim == 1 ? 4096 : 512); }
};

struct OutputConfig {
    std::string directory = ".";
    std::vector<std::string> formats = {"csv", "json", "field"};
};

struct RunConfig {
    int dim = 1;
    double s = 0.5;
    AlphaSpec alpha;
    MassSpec a;
    GridConfig grid;
    PotentialSpec potential;
    SolverConfig solver;

    // sweep section
    std::vector<int> sweep_js = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    int q_grid_n = 32768;
    double q_grid_length = 1024.0;
    bool continuation = true;
    int threads = 1;

    OutputConfig output;
};

// TOML-style sections/key-value file. Unknown keys are errors; every
// violated cross-field constraint is reported with the condition it encodes.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

void validate_run_config(const RunConfig& cfg);

// Canonical JSON of the semantically meaningful fields (hash input).
nlohmann::json run_config_json(const RunConfig& cfg);

SweepConfig to_sweep_config(const RunConfig& cfg);

}  // namespace fnls
