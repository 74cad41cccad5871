#include "fnls/config.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fnls/functionals.hpp"

namespace fnls {

namespace {

struct ConfigValue {
    std::string raw;
    int line = 0;
};

using Section = std::map<std::string, ConfigValue>;

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, Section> tokenize(const std::string& text, const std::string& origin) {
    std::map<std::string, Section> sections;
    std::string current = "";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) fail(origin, lineno, "empty section name");
            sections[current];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, lineno, "expected key = value");
        if (sections[current].count(key)) fail(origin, lineno, "duplicate key '" + key + "'");
        sections[current][key] = ConfigValue{value, lineno};
    }
    return sections;
}

bool parse_number(const std::string& raw, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(raw, &used);
        return used == raw.size();
    } catch (...) {
        return false;
    }
}

std::string unquote(const std::string& raw) {
    if (raw.size() >= 2 && ((raw.front() == '"' && raw.back() == '"') ||
                            (raw.front() == '\'' && raw.back() == '\'')))
        return raw.substr(1, raw.size() - 2);
    return raw;
}

std::vector<std::string> split_array(const std::string& raw, const std::string& origin,
                                     int line) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
        fail(origin, line, "expected an array [..]");
    std::vector<std::string> items;
    std::string body = raw.substr(1, raw.size() - 2);
    std::istringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

class SectionReader {
  public:
    SectionReader(std::map<std::string, Section>& sections, std::string name,
                  std::string origin)
        : origin_(std::move(origin)), name_(std::move(name)) {
        auto it = sections.find(name_);
        if (it != sections.end()) section_ = &it->second;
    }

    bool present() const { return section_ != nullptr; }

    const ConfigValue* find(const std::string& key) {
        if (!section_) return nullptr;
        auto it = section_->find(key);
        if (it == section_->end()) return nullptr;
        seen_.push_back(key);
        return &it->second;
    }

    bool get_double(const std::string& key, double& out) {
        const ConfigValue* v = find(key);
        if (!v) return false;
        if (!parse_number(v->raw, out))
            fail(origin_, v->line, "[" + name_ + "] " + key + ": expected a number");
        return true;
    }

    bool get_int(const std::string& key, int& out) {
        double d;
        if (!get_double(key, d)) return false;
        if (d != std::floor(d))
            fail(origin_, 0, "[" + name_ + "] " + key + ": expected an integer");
        out = static_cast<int>(d);
        return true;
    }

    bool get_long(const std::string& key, long& out) {
        double d;
        if (!get_double(key, d)) return false;
        out = static_cast<long>(d);
        return true;
    }

    bool get_bool(const std::string& key, bool& out) {
        const ConfigValue* v = find(key);
        if (!v) return false;
        std::string raw = unquote(v->raw);
        if (raw == "true") out = true;
        else if (raw == "false") out = false;
        else fail(origin_, v->line, "[" + name_ + "] " + key + ": expected true/false");
        return true;
    }

    bool get_string(const std::string& key, std::string& out) {
        const ConfigValue* v = find(key);
        if (!v) return false;
        out = unquote(v->raw);
        return true;
    }

    bool get_double_array(const std::string& key, std::vector<double>& out) {
        const ConfigValue* v = find(key);
        if (!v) return false;
        out.clear();
        if (v->raw.front() == '[') {
            for (const auto& item : split_array(v->raw, origin_, v->line)) {
                double d;
                if (!parse_number(item, d))
                    fail(origin_, v->line, "[" + name_ + "] " + key + ": bad array entry");
                out.push_back(d);
            }
        } else {
            double d;
            if (!parse_number(v->raw, d))
                fail(origin_, v->line, "[" + name_ + "] " + key + ": expected a number");
            out.push_back(d);
        }
        return true;
    }

    void check_unknown_keys() const {
        if (!section_) return;
        for (const auto& [key, value] : *section_)
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                fail(origin_, value.line, "[" + name_ + "] unknown key '" + key + "'");
    }

    const std::string& origin() const { return origin_; }

  private:
    const Section* section_ = nullptr;
    std::string origin_;
    std::string name_;
    std::vector<std::string> seen_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    auto sections = tokenize(text, origin);
    for (const auto& [name, sec] : sections) {
        (void)sec;
        if (name != "problem" && name != "grid" && name != "potential" &&
            name != "solver" && name != "sweep" && name != "output")
            throw std::invalid_argument(origin + ": unknown section [" + name + "]");
    }

    RunConfig cfg;

    SectionReader problem(sections, "problem", origin);
    problem.get_int("d", cfg.dim);
    problem.get_double("s", cfg.s);
    if (const ConfigValue* v = problem.find("alpha")) {
        std::string raw = unquote(v->raw);
        if (raw == "critical") {
            cfg.alpha.critical = true;
        } else {
            double d;
            if (!parse_number(raw, d))
                fail(origin, v->line, "[problem] alpha: expected a number or \"critical\"");
            cfg.alpha = AlphaSpec{false, d};
        }
    }
    if (const ConfigValue* v = problem.find("a")) {
        std::string raw = unquote(v->raw);
        const std::size_t star = raw.find("a_star");
        if (star != std::string::npos) {
            std::string factor = trim(raw.substr(0, star));
            if (!factor.empty() && factor.back() == '*') factor.pop_back();
            factor = trim(factor);
            double mult = 1.0;
            if (!factor.empty() && !parse_number(factor, mult))
                fail(origin, v->line, "[problem] a: expected \"<number>*a_star\" or a number");
            cfg.a = MassSpec{true, mult};
        } else {
            double d;
            if (!parse_number(raw, d))
                fail(origin, v->line, "[problem] a: expected a number or \"<number>*a_star\"");
            cfg.a = MassSpec{false, d};
        }
    }
    problem.check_unknown_keys();

    SectionReader grid(sections, "grid", origin);
    grid.get_int("N", cfg.grid.n);
    grid.get_double("L", cfg.grid.length);
    grid.check_unknown_keys();

    SectionReader pot(sections, "potential", origin);
    if (pot.present()) {
        std::string kind = "zero";
        pot.get_string("kind", kind);
        if (kind == "zero") cfg.potential.kind = PotentialKind::zero;
        else if (kind == "periodic_power") cfg.potential.kind = PotentialKind::periodic_power;
        else throw std::invalid_argument(origin + ": [potential] kind must be "
                                         "\"zero\" or \"periodic_power\"");
        pot.get_double("kappa", cfg.potential.kappa);
        pot.get_double("p", cfg.potential.p);
        std::vector<double> x0;
        if (pot.get_double_array("x0", x0)) cfg.potential.x0 = x0;
        int cpp = 0;
        pot.get_int("cells_per_period", cpp);  // accepted, revalidated at sampling
        pot.check_unknown_keys();
    }
    if (cfg.potential.kind == PotentialKind::periodic_power && cfg.potential.x0.empty())
        cfg.potential.x0.assign(static_cast<std::size_t>(cfg.dim), 0.0);

    SectionReader solver(sections, "solver", origin);
    solver.get_double("dt", cfg.solver.dt);
    solver.get_double("tol_grad", cfg.solver.tol_grad);
    solver.get_double("tol_energy", cfg.solver.tol_energy);
    solver.get_long("max_iter", cfg.solver.max_iter);
    solver.get_double("gamma", cfg.solver.petviashvili_gamma);
    solver.get_double("init_width", cfg.solver.init.width);
    solver.get_int("init_count", cfg.solver.init.count);
    long seed = 0;
    if (solver.get_long("seed", seed)) cfg.solver.rng_seed = static_cast<std::uint64_t>(seed);
    solver.check_unknown_keys();

    SectionReader sweep(sections, "sweep", origin);
    if (sweep.present()) {
        std::vector<double> js;
        if (sweep.get_double_array("js", js)) {
            cfg.sweep_js.clear();
            for (double j : js) cfg.sweep_js.push_back(static_cast<int>(j));
        }
        sweep.get_int("q_N", cfg.q_grid_n);
        sweep.get_double("q_L", cfg.q_grid_length);
        sweep.get_bool("continuation", cfg.continuation);
        sweep.get_int("threads", cfg.threads);
        sweep.check_unknown_keys();
    }

    SectionReader output(sections, "output", origin);
    if (output.present()) {
        output.get_string("directory", cfg.output.directory);
        const ConfigValue* v = output.find("formats");
        if (v) {
            cfg.output.formats.clear();
            for (const auto& item : split_array(v->raw, origin, v->line))
                cfg.output.formats.push_back(unquote(item));
        }
        output.check_unknown_keys();
    }

    validate_run_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("parse_config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.dim != 1 && cfg.dim != 2)
        throw std::invalid_argument("config: d must be 1 or 2");
    if (!(cfg.s > 0) || !(cfg.s < 1))
        throw std::invalid_argument("config: s must lie in (0,1)");
    const double alpha = cfg.alpha.resolve(cfg.dim, cfg.s);
    require_admissible_alpha(cfg.dim, cfg.s, alpha);
    if (!cfg.a.a_star_multiple && !(cfg.a.value > 0))
        throw std::invalid_argument("config: mass a must be positive");
    if (cfg.a.a_star_multiple && !(cfg.a.value > 0))
        throw std::invalid_argument("config: a_star multiple must be positive");

    const int n = cfg.grid.resolved_n(cfg.dim);
    if (!is_power_of_two(n) || n < 64)
        throw std::invalid_argument("config: grid N must be a power of two >= 64");
    if (!(cfg.grid.length > 0))
        throw std::invalid_argument("config: grid L must be positive");

    validate_potential_spec(cfg.potential, cfg.dim, cfg.s);
    if (cfg.potential.kind == PotentialKind::periodic_power) {
        const double L = cfg.grid.length;
        const long Lint = std::lround(L);
        if (std::abs(L - static_cast<double>(Lint)) > 1e-12 || Lint <= 0 || n % Lint != 0)
            throw std::invalid_argument(
                "config: grid L must be a positive integer dividing N so each unit "
                "period holds a whole number of cells");
    }

    if (!(cfg.solver.dt > 0) || !(cfg.solver.tol_grad > 0) || !(cfg.solver.tol_energy > 0))
        throw std::invalid_argument("config: solver steps and tolerances must be positive");
    if (cfg.solver.max_iter <= 0)
        throw std::invalid_argument("config: solver max_iter must be positive");

    for (std::size_t i = 0; i < cfg.sweep_js.size(); ++i) {
        if (cfg.sweep_js[i] < 1)
            throw std::invalid_argument("config: sweep js must be >= 1");
        if (i > 0 && cfg.sweep_js[i] <= cfg.sweep_js[i - 1])
            throw std::invalid_argument("config: sweep js must be strictly increasing");
    }
}

nlohmann::json run_config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["problem"] = {{"d", cfg.dim},
                    {"s", cfg.s},
                    {"alpha_critical", cfg.alpha.critical},
                    {"alpha", cfg.alpha.critical ? 0.0 : cfg.alpha.value},
                    {"a_star_multiple", cfg.a.a_star_multiple},
                    {"a", cfg.a.value}};
    j["grid"] = {{"N", cfg.grid.resolved_n(cfg.dim)}, {"L", cfg.grid.length}};
    j["potential"] = {{"kind", cfg.potential.kind == PotentialKind::zero
                                   ? "zero"
                                   : (cfg.potential.kind == PotentialKind::periodic_power
                                          ? "periodic_power"
                                          : "samples")},
                      {"kappa", cfg.potential.kappa},
                      {"p", cfg.potential.p},
                      {"x0", cfg.potential.x0}};
    j["solver"] = {{"dt", cfg.solver.dt},
                   {"tol_grad", cfg.solver.tol_grad},
                   {"tol_energy", cfg.solver.tol_energy},
                   {"max_iter", cfg.solver.max_iter},
                   {"gamma", cfg.solver.petviashvili_gamma},
                   {"init_width", cfg.solver.init.width},
                   {"init_count", cfg.solver.init.count},
                   {"seed", cfg.solver.rng_seed}};
    j["sweep"] = {{"js", cfg.sweep_js},
                  {"q_N", cfg.q_grid_n},
                  {"q_L", cfg.q_grid_length},
                  {"continuation", cfg.continuation},
                  {"threads", cfg.threads}};
    return j;
}

SweepConfig to_sweep_config(const RunConfig& cfg) {
    SweepConfig sw;
    sw.dim = cfg.dim;
    sw.s = cfg.s;
    sw.potential = cfg.potential;
    sw.schedule_j = cfg.sweep_js;
    sw.solver = cfg.solver;
    sw.grid_n = cfg.grid.resolved_n(cfg.dim);
    sw.grid_length = cfg.grid.length;
    sw.max_grid_n = std::max(sw.grid_n * 8, sw.grid_n);
    sw.q_grid_n = cfg.q_grid_n;
    sw.q_grid_length = cfg.q_grid_length;
    sw.continuation = cfg.continuation;
    sw.threads = cfg.threads;
    return sw;
}

}  // namespace fnls
