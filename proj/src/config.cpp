#include "darkchain/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "darkchain/errors.hpp"

namespace darkchain {

namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

int to_int(const std::string& s) {
    const double v = to_double(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("not an integer: '" + s + "'");
    return static_cast<int>(v);
}

std::vector<double> range(double from, double to, double step) {
    if (!(step > 0.0)) throw ConfigError("range step must be > 0");
    if (to < from) throw ConfigError("range end below start");
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(from + static_cast<double>(k) * step);
    return out;
}

std::vector<double> doubles_of(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(key + " entries must be numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    if (v.is_object()) {
        for (const auto& [k, x] : v.items())
            if (k != "from" && k != "to" && k != "step") throw ConfigError(key + ": unknown range key '" + k + "'");
        if (!v.contains("from") || !v.contains("to")) throw ConfigError(key + " range needs from and to");
        return range(v["from"].get<double>(), v["to"].get<double>(), v.value("step", 1.0));
    }
    if (v.is_string()) return parse_double_list(v.get<std::string>());
    throw ConfigError(key + " must be a number, list or range");
}

std::vector<int> ints_of(const json& v, const std::string& key) {
    if (v.is_string()) return parse_int_list(v.get<std::string>());
    std::vector<int> out;
    for (double d : doubles_of(v, key)) {
        if (d != std::floor(d)) throw ConfigError(key + " entries must be integers");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

bool bool_of(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "true" || s == "on" || s == "1") return true;
        if (s == "false" || s == "off" || s == "0") return false;
    }
    throw ConfigError(key + " must be a boolean");
}

double number_of(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return to_double(v.get<std::string>());
    throw ConfigError(key + " must be a number");
}

InjectionMode injection_of(const std::string& s) {
    if (s == "site") return InjectionMode::SiteBasis;
    if (s == "eigen") return InjectionMode::EigenBasis;
    throw ConfigError("injection_mode must be 'site' or 'eigen', got '" + s + "'");
}

std::vector<int> seq(int a, int b) {
    std::vector<int> v;
    for (int i = a; i <= b; ++i) v.push_back(i);
    return v;
}

UnitCellKind cell(CellShape s) {
    UnitCellKind k;
    k.shape = s;
    return k;
}

}  // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> c{"eigen",       "steady",          "length-sweep",       "jb-sweep",
                                            "disorder",    "regime-grid",     "brme-check",         "eigeninj-sweep",
                                            "population-profile", "brightness-robustness"};
    return c;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split(s, ',')) {
        const auto r = split(part, ':');
        if (r.size() == 1) out.push_back(to_int(r[0]));
        else if (r.size() == 2 || r.size() == 3) {
            const int a = to_int(r[0]), b = to_int(r[1]), st = r.size() == 3 ? to_int(r[2]) : 1;
            if (st <= 0 || b < a) throw ConfigError("bad integer range '" + part + "'");
            for (int i = a; i <= b; i += st) out.push_back(i);
        } else {
            throw ConfigError("bad integer list '" + s + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) {
        const auto r = split(part, ':');
        if (r.size() == 1) out.push_back(to_double(r[0]));
        else if (r.size() == 3) {
            const auto v = range(to_double(r[0]), to_double(r[1]), to_double(r[2]));
            out.insert(out.end(), v.begin(), v.end());
        } else {
            throw ConfigError("bad number list '" + part + "' (use a, a,b,c or from:to:step)");
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

std::vector<UnitCellKind> parse_geometries(const std::string& s) {
    std::vector<UnitCellKind> out;
    for (const auto& name : split(s, ',')) {
        const auto shape = parse_cell_shape(name);
        if (!shape) throw ConfigError("unknown geometry '" + name + "'");
        if (*shape == CellShape::Custom) throw ConfigError("custom geometry needs custom_cell coordinates");
        out.push_back(cell(*shape));
    }
    if (out.empty()) throw ConfigError("empty geometry list");
    return out;
}

RunConfig default_config(const std::string& command) {
    if (std::find(known_commands().begin(), known_commands().end(), command) == known_commands().end())
        throw ConfigError("unknown command '" + command + "'");
    RunConfig c;
    c.command = command;
    auto& s = c.sweep;
    const std::vector<UnitCellKind> base_set{cell(CellShape::Mono), cell(CellShape::Dimer), cell(CellShape::Prism)};
    const std::vector<double> jb_fine{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
    if (command == "eigen" || command == "steady" || command == "population-profile") {
        s.n_cells = {10};
        s.jb = {1.0};
    } else if (command == "length-sweep" || command == "eigeninj-sweep") {
        s.geometries = base_set;
        s.n_cells = seq(2, 40);
        s.jb = {0.1, 1.0, 10.0};
    } else if (command == "jb-sweep") {
        s.geometries = base_set;
        s.n_cells = {20};
        s.jb = jb_fine;
    } else if (command == "disorder") {
        s.geometries = {cell(CellShape::Dimer), cell(CellShape::Prism)};
        s.n_cells = {20};
        s.jb = {0.1, 1.0, 10.0};
        s.sigma = 0.9 * s.hparams.delta_E;
        s.n_realizations = 1000;
    } else if (command == "regime-grid") {
        s.geometries = {cell(CellShape::Mono), cell(CellShape::Prism)};
        s.n_cells = {20};
        s.jb = jb_fine;
        s.sigma = 0.9 * s.hparams.delta_E;
        s.n_realizations = 200;
    } else if (command == "brightness-robustness") {
        s.geometries = {cell(CellShape::Dimer), cell(CellShape::Prism)};
        s.n_cells = {20};
        s.jb = {10.0};
        s.sigma = 0.9 * s.hparams.delta_E;
        s.n_realizations = 1000;
    } else if (command == "brme-check") {
        s.geometries = base_set;
        s.n_cells = {2, 5, 10, 20};
        s.jb = {0.1, 1.0, 10.0};
        s.method = Method::Both;
    }
    return c;
}

void apply_json(RunConfig& c, const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto& s = c.sweep;
    std::vector<std::array<double, 2>> custom;
    bool has_custom = false;
    // geometry must be resolved after custom_cell
    if (j.contains("custom_cell")) {
        const auto& v = j["custom_cell"];
        if (!v.is_array()) throw ConfigError("custom_cell must be a list of [y, z] pairs");
        for (const auto& p : v) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ConfigError("custom_cell entries must be [y, z] number pairs");
            custom.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        has_custom = true;
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "command") {
            if (!v.is_string()) throw ConfigError("command must be a string");
            if (v.get<std::string>() != c.command) throw ConfigError("config command '" + v.get<std::string>() +
                                                                      "' does not match '" + c.command + "'");
        } else if (key == "custom_cell") {
        } else if (key == "geometry") {
            std::vector<std::string> names;
            if (v.is_string()) names = split(v.get<std::string>(), ',');
            else if (v.is_array())
                for (const auto& x : v) names.push_back(x.get<std::string>());
            else throw ConfigError("geometry must be a name or list of names");
            s.geometries.clear();
            for (const auto& n : names) {
                if (n == "custom") {
                    if (!has_custom) throw ConfigError("geometry 'custom' needs custom_cell");
                    s.geometries.push_back(UnitCellKind::custom(custom));
                } else {
                    const auto g = parse_geometries(n);
                    s.geometries.insert(s.geometries.end(), g.begin(), g.end());
                }
            }
        } else if (key == "n_cells") s.n_cells = ints_of(v, key);
        else if (key == "jb") s.jb = doubles_of(v, key);
        else if (key == "delta_E") s.hparams.delta_E = number_of(v, key);
        else if (key == "E0") s.hparams.E0 = number_of(v, key);
        else if (key == "Eg") s.hparams.Eg = number_of(v, key);
        else if (key == "Ja") s.hparams.Ja = number_of(v, key);
        else if (key == "gamma_rad") s.env.gamma_rad = number_of(v, key);
        else if (key == "gamma_nr") s.env.gamma_nr = number_of(v, key);
        else if (key == "gamma_phonon") s.env.gamma_phonon = number_of(v, key);
        else if (key == "T_ph") s.env.T_ph = number_of(v, key);
        else if (key == "Gamma") s.env.Gamma = number_of(v, key);
        else if (key == "gamma_inj") s.env.gamma_inj = number_of(v, key);
        else if (key == "gamma_ext") s.env.gamma_ext = number_of(v, key);
        else if (key == "dipoles") s.dipoles = bool_of(v, key);
        else if (key == "injection_mode") {
            if (!v.is_string()) throw ConfigError("injection_mode must be a string");
            s.injection = injection_of(v.get<std::string>());
        } else if (key == "method") {
            const auto m = v.is_string() ? parse_method(v.get<std::string>()) : std::nullopt;
            if (!m) throw ConfigError("method must be PME, BRME or both");
            s.method = *m;
        } else if (key == "sigma") s.sigma = number_of(v, key);
        else if (key == "n_realizations") s.n_realizations = static_cast<int>(number_of(v, key));
        else if (key == "seed") {
            if (v.is_number_unsigned()) s.base_seed = v.get<std::uint64_t>();
            else if (v.is_number_integer() && v.get<long long>() >= 0) s.base_seed = v.get<std::uint64_t>();
            else if (v.is_string()) s.base_seed = std::stoull(v.get<std::string>());
            else throw ConfigError("seed must be a non-negative integer");
        } else if (key == "gamma_rad_grid") s.gamma_rad_grid = doubles_of(v, key);
        else if (key == "gamma_nr_factors") s.gamma_nr_factors = doubles_of(v, key);
        else if (key == "dark_threshold") s.dark_threshold = number_of(v, key);
        else if (key == "robustness_decades") s.robustness_decades = number_of(v, key);
        else if (key == "brme_max_n") s.brme_max_n = static_cast<int>(number_of(v, key));
        else if (key == "brme_max_dim2") s.brme.max_dim2 = static_cast<long>(number_of(v, key));
        else if (key == "keep_raw") s.keep_raw = bool_of(v, key);
        else if (key == "jobs") s.jobs = static_cast<int>(number_of(v, key));
        else if (key == "out") c.out_dir = v.get<std::string>();
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    json v;
    try {
        v = json::parse(value);
    } catch (const json::exception&) {
        v = value;
    }
    apply_json(c, json{{key, v}});
}

json config_to_json(const RunConfig& c) {
    json j = sweep_to_json(c.sweep);
    j["command"] = c.command;
    for (const auto& g : c.sweep.geometries)
        if (g.shape == CellShape::Custom) {
            json cc = json::array();
            for (const auto& p : g.custom_coords) cc.push_back({p[0], p[1]});
            j["custom_cell"] = cc;
        }
    return j;
}

PointSpec point_of(const RunConfig& c) {
    const auto& s = c.sweep;
    s.validate();
    PointSpec p;
    p.cell = s.geometries.front();
    p.n_cells = s.n_cells.front();
    p.hparams = s.hparams;
    p.hparams.Jb = s.jb.front();
    p.hparams.dipole_mode = s.dipoles;
    p.env = s.env;
    p.injection = s.injection;
    if (s.sigma > 0.0) p.disorder = {s.sigma, s.base_seed, 0};
    return p;
}

ExperimentOutput run_experiment(const RunConfig& c) {
    const auto& s = c.sweep;
    const std::string& cmd = c.command;
    if (cmd == "eigen") return eigen_report(point_of(c), s.dark_threshold);
    if (cmd == "steady") return steady_point(point_of(c), s.method, s.brme);
    if (cmd == "length-sweep") return length_sweep(s);
    if (cmd == "eigeninj-sweep") return eigenbasis_injection_sweep(s);
    if (cmd == "jb-sweep") return jb_sweep(s);
    if (cmd == "disorder") return disorder_ensemble(s);
    if (cmd == "regime-grid") return regime_grid(s);
    if (cmd == "brme-check") return brme_check(s);
    if (cmd == "population-profile") return population_profile(s);
    if (cmd == "brightness-robustness") return brightness_robustness(s);
    throw ConfigError("unknown command '" + cmd + "'");
}

}  // namespace darkchain
