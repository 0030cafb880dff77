#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkchain/brme.hpp"
#include "darkchain/io.hpp"
#include "darkchain/pme.hpp"

namespace darkchain {

enum class Method { PME, BRME, Both };
const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& s);

// Everything needed to solve one network.
struct PointSpec {
    UnitCellKind cell;
    int n_cells = 10;
    HamiltonianParams hparams;
    EnvironmentParams env;
    InjectionMode injection = InjectionMode::SiteBasis;
    std::optional<DipoleScheme> dipoles;  // AllAlongTransport when dipole_mode and unset
    DisorderSpec disorder;
};

Hamiltonian build_point_hamiltonian(const PointSpec& p);
NetworkModel build_point_model(const PointSpec& p);

struct PointResult {
    PointSpec spec;
    std::optional<SteadyStateReport> pme;
    std::optional<SteadyStateReport> brme;
};

PointResult solve_point(const PointSpec& p, Method method, const LiouvillianOptions& brme = {});

struct SweepSpec {
    std::vector<UnitCellKind> geometries{UnitCellKind{}};
    std::vector<int> n_cells{10};
    std::vector<double> jb{1.0};
    HamiltonianParams hparams;
    EnvironmentParams env;
    InjectionMode injection = InjectionMode::SiteBasis;
    bool dipoles = false;
    double sigma = 0.0;
    int n_realizations = 1;
    std::uint64_t base_seed = 0;
    Method method = Method::PME;
    int brme_max_n = 20;
    std::vector<double> gamma_rad_grid{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<double> gamma_nr_factors{0.1, 1.0, 10.0};
    double dark_threshold = 1e-6;
    double robustness_decades = 1.0;
    bool keep_raw = true;
    LiouvillianOptions brme;
    int jobs = 0;  // 0: OpenMP default

    void validate() const;
};

nlohmann::json sweep_to_json(const SweepSpec& s);

// I = alpha exp(-beta N) by least squares on ln I.
struct FitResult {
    double alpha = 0.0;
    double beta = 0.0;
    double residual = 0.0;  // ||ln I - fit||_2
    int n_min = 0;
    int n_max = 0;
    int n_used = 0;
    int n_excluded = 0;
};

FitResult fit_exponential(const std::vector<int>& n, const std::vector<double>& current);

// Ensemble seed for one (Jb index) stream; realizations index into it.
std::uint64_t ensemble_seed(std::uint64_t base_seed, std::uint64_t jb_index);

struct EnsembleStats {
    double clean = 0.0;
    double median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
    double log10_iqr = 0.0;          // log10(q3 / q1)
    double fraction_within = 0.0;    // |log10(I / clean)| <= decades
    int n_ok = 0;
    int n_failed = 0;
    std::vector<double> raw;         // realization order, NaN for failures
};

EnsembleStats ensemble_stats(double clean, const std::vector<double>& currents, double decades);

// Result of one experiment: named tables plus a JSON summary.
struct ExperimentOutput {
    std::string name;
    std::vector<std::pair<std::string, Table>> tables;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> warnings;

    const Table& table(const std::string& name) const;
};

// Runs fn(i) for i in [0, n) on an OpenMP pool. Failures are captured per
// index instead of aborting the loop.
std::vector<std::string> parallel_for(int n, int jobs, const std::function<void(int)>& fn);

ExperimentOutput eigen_report(const PointSpec& p, double dark_threshold = 1e-6);
ExperimentOutput steady_point(const PointSpec& p, Method method, const LiouvillianOptions& brme = {});
ExperimentOutput population_profile(const SweepSpec& s);
ExperimentOutput length_sweep(const SweepSpec& s);
ExperimentOutput jb_sweep(const SweepSpec& s);
ExperimentOutput disorder_ensemble(const SweepSpec& s);
ExperimentOutput regime_grid(const SweepSpec& s);
ExperimentOutput brightness_robustness(const SweepSpec& s);
ExperimentOutput eigenbasis_injection_sweep(const SweepSpec& s);
ExperimentOutput brme_check(const SweepSpec& s);

}  // namespace darkchain
