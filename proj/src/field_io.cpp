#include "fnls/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fnls/grid.hpp"

namespace fnls {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts unsupported");

void write_field(const std::string& path, const Field& u, std::optional<double> s_used) {
    nlohmann::json header;
    header["version"] = 1;
    header["dim"] = u.grid.dim;
    header["N"] = u.grid.n;
    header["L"] = u.grid.length;
    if (s_used) header["s_used"] = *s_used;
    header["is_real"] = u.is_real_hint;
    header["dtype"] = u.is_real_hint ? "f64" : "c128";
    header["byte_order"] = "little";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field: cannot open " + path);
    out << header.dump() << '\n';
    if (u.is_real_hint) {
        std::vector<double> re(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) re[i] = u.values[i].real();
        out.write(reinterpret_cast<const char*>(re.data()),
                  static_cast<std::streamsize>(re.size() * sizeof(double)));
    } else {
        out.write(reinterpret_cast<const char*>(u.values.data()),
                  static_cast<std::streamsize>(u.values.size() * sizeof(cplx)));
    }
    if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

Field read_field(const std::string& path, FieldFileInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field: cannot open " + path);
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error("read_field: missing header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_field: bad header in " + path + ": " + e.what());
    }
    const int version = header.value("version", -1);
    if (version != 1)
        throw std::runtime_error("read_field: unsupported field format version " +
                                 std::to_string(version) + " in " + path);
    if (header.value("byte_order", "") != "little")
        throw std::runtime_error("read_field: unsupported byte order in " + path);

    const int dim = header.at("dim").get<int>();
    const int n = header.at("N").get<int>();
    const double length = header.at("L").get<double>();
    const bool is_real = header.at("is_real").get<bool>();
    const std::string dtype = header.at("dtype").get<std::string>();
    if ((is_real && dtype != "f64") || (!is_real && dtype != "c128"))
        throw std::runtime_error("read_field: dtype/is_real mismatch in " + path);

    Grid grid = make_grid(dim, n, length);
    Field u(grid, is_real);

    const std::size_t count = grid.size();
    const std::size_t expect = count * (is_real ? sizeof(double) : sizeof(cplx));
    std::vector<char> payload(expect);
    in.read(payload.data(), static_cast<std::streamsize>(expect));
    if (static_cast<std::size_t>(in.gcount()) != expect || in.peek() != EOF)
        throw std::runtime_error("read_field: corrupt file (payload length mismatch) in " +
                                 path);
    if (is_real) {
        const double* re = reinterpret_cast<const double*>(payload.data());
        for (std::size_t i = 0; i < count; ++i) u.values[i] = re[i];
    } else {
        std::memcpy(u.values.data(), payload.data(), expect);
    }
    if (info) {
        info->version = version;
        info->dtype = dtype;
        if (header.contains("s_used")) info->s_used = header["s_used"].get<double>();
    }
    return u;
}

}  // namespace fnls
