#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "darkchain/config.hpp"
#include "darkchain/errors.hpp"
#include "darkchain/io.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

int fail(const std::string& kind, const std::string& message, const std::string& command, int code) {
    nlohmann::json rec = {{"error", {{"kind", kind}, {"message", message}, {"command", command}}}};
    std::cerr << rec.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace darkchain;

    CLI::App app{"Steady-state exciton transport through chains of multi-site unit cells"};
    app.set_version_flag("--version", kVersion);

    std::string command;
    std::string config_path, out_dir, geometry, n_cells, jb, injection, method;
    std::optional<int> jobs, realizations;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma_rad, gamma_nr, sigma;
    std::optional<bool> dipoles;
    std::vector<std::string> sets;

    std::string cmds;
    for (const auto& c : known_commands()) cmds += (cmds.empty() ? "" : ", ") + c;
    app.add_option("command", command, "one of: " + cmds);
    app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "base seed for disorder ensembles");
    app.add_option("--geometry", geometry, "mono, dimer, trimer, prism, cuboid (comma list)");
    app.add_option("--n-cells", n_cells, "chain lengths: 20, 5,10,20 or 2:40[:step]");
    app.add_option("--jb", jb, "intra-cell coupling: 10, 0.1,1,10 or from:to:step");
    app.add_option("--gamma-rad", gamma_rad, "radiative decay rate");
    app.add_option("--gamma-nr", gamma_nr, "non-radiative decay rate");
    app.add_option("--sigma", sigma, "on-site disorder standard deviation");
    app.add_option("--realizations", realizations, "disorder realizations per point");
    app.add_option("--dipoles", dipoles, "dipole couplings and emission along transport (true/false)");
    app.add_option("--injection-mode", injection, "site or eigen")->check(CLI::IsMember({"site", "eigen"}));
    app.add_option("--method", method, "PME, BRME or both")->check(CLI::IsMember({"PME", "BRME", "both", "pme", "brme"}));
    app.add_option("--set", sets, "extra override key=value (any config key)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage-error", e.what(), command, 2);
    }

    try {
        nlohmann::json file_cfg;
        if (!config_path.empty()) {
            try {
                file_cfg = nlohmann::json::parse(read_file(config_path));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            if (command.empty() && file_cfg.is_object() && file_cfg.contains("command") && file_cfg["command"].is_string())
                command = file_cfg["command"].get<std::string>();
        }
        if (command.empty()) return fail("usage-error", "missing command (one of: " + cmds + ")", command, 2);

        RunConfig cfg = default_config(command);
        if (!config_path.empty()) apply_json(cfg, file_cfg);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (jobs) cfg.sweep.jobs = *jobs;
        if (seed) cfg.sweep.base_seed = *seed;
        if (!geometry.empty()) cfg.sweep.geometries = parse_geometries(geometry);
        if (!n_cells.empty()) cfg.sweep.n_cells = parse_int_list(n_cells);
        if (!jb.empty()) cfg.sweep.jb = parse_double_list(jb);
        if (gamma_rad) cfg.sweep.env.gamma_rad = *gamma_rad;
        if (gamma_nr) cfg.sweep.env.gamma_nr = *gamma_nr;
        if (sigma) cfg.sweep.sigma = *sigma;
        if (realizations) cfg.sweep.n_realizations = *realizations;
        if (dipoles) cfg.sweep.dipoles = *dipoles;
        if (!injection.empty()) apply_override(cfg, "injection_mode", '"' + injection + '"');
        if (!method.empty()) apply_override(cfg, "method", '"' + method + '"');
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
            apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        cfg.sweep.validate();

        const ExperimentOutput result = run_experiment(cfg);

        OutputSet out(cfg.out_dir);
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [name, table] : result.tables) {
            out.add_table(name, table);
            files.push_back(name);
        }
        nlohmann::json meta = {{"tool", "darkchain"},
                               {"version", kVersion},
                               {"command", cfg.command},
                               {"parameters", config_to_json(cfg)},
                               {"tolerances",
                                {{"degeneracy", kDegeneracyTol},
                                 {"frequency_grouping", kFrequencyTol},
                                 {"dark_threshold", cfg.sweep.dark_threshold},
                                 {"robustness_decades", cfg.sweep.robustness_decades},
                                 {"population_clip", 1e-12}}},
                               {"files", files},
                               {"summary", result.summary},
                               {"warnings", result.warnings}};
        out.add_json(cfg.command + ".json", meta);
        for (const auto& p : out.commit()) std::cout << p.string() << "\n";
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        return 0;
    } catch (const ConfigError& e) {
        return fail(e.kind(), e.what(), command, 2);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), command, 3);
    } catch (const nlohmann::json::exception& e) {
        return fail("config-error", e.what(), command, 2);
    } catch (const std::exception& e) {
        return fail("internal-error", e.what(), command, 4);
    }
}
