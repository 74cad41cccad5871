#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "fnls/blowup.hpp"
#include "fnls/functionals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& data);

// Hash of the canonical (sorted-key) JSON dump: stable under key reordering,
// changes iff a semantically meaningful value changes.
std::string config_hash(const nlohmann::json& config);

// Throws if any number in the tree is NaN or infinite.
void ensure_finite(const nlohmann::json& j, const std::string& context);

// {tool_version, config_hash, wall_time_s, provenance, payload}
nlohmann::json make_envelope(const nlohmann::json& config, double wall_time_s,
                             nlohmann::json payload);

// Pretty-printed with sorted keys; finiteness-checked.
void write_json_report(const std::string& path, const nlohmann::json& report);

nlohmann::json to_json(const EnergyBreakdown& e);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const PohozaevReport& r);
nlohmann::json to_json(const GnConstant& g);
nlohmann::json to_json(const DecayFit& d);
nlohmann::json to_json(const V2Report& r);
nlohmann::json to_json(const WitnessReport& r);
nlohmann::json to_json(const SweepSummary& s);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fnls
