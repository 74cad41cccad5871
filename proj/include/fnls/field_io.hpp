#pragma once

#include <optional>
#include <string>

#include "fnls/field.hpp"

namespace fnls {

// ".field" container: one JSON header line
//   {"version":1,"dim":..,"N":..,"L":..,"s_used":..,"is_real":..,
//    "dtype":"c128"|"f64","byte_order":"little"}
// followed by the raw little-endian payload. Round trips are bit exact.
struct FieldFileInfo {
    int version = 1;
    std::optional<double> s_used;
    std::string dtype;
};

void write_field(const std::string& path, const Field& u,
                 std::optional<double> s_used = std::nullopt);

Field read_field(const std::string& path, FieldFileInfo* info = nullptr);

}  // namespace fnls
