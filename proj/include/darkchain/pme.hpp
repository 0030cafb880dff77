#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "darkchain/spectral.hpp"

namespace darkchain {

// chi(n, m) = W(n, m) off the diagonal, chi(n, n) = -sum_m W(m, n).
struct Generator {
    Eigen::MatrixXd chi;
    int dim() const { return static_cast<int>(chi.rows()); }
};

Generator build_generator(const Eigen::MatrixXd& w);
inline Generator build_generator(const RateMatrix& w) { return build_generator(w.total); }

struct NullSpaceSolution {
    Eigen::VectorXd populations;
    double residual = 0.0;        // ||chi P||_2
    double chi_norm = 0.0;        // ||chi||_2
    double sigma_min = 0.0;       // smallest singular value
    double sigma_next = 0.0;      // second smallest
    double clipped = 0.0;         // most negative entry clipped to zero
};

// Closed communicating classes of the rate graph (edge m -> n when chi(n, m) > 0).
std::vector<std::vector<int>> closed_classes(const Generator& g);

// Unique null vector of chi, nonnegative and summing to one.
NullSpaceSolution steady_state(const Generator& g);

using KindFluxes = std::array<double, kChannelKinds>;

// Result of a steady-state solve by either method. For PME the populations
// are the eigenstate occupations; for BRME they are the eigenbasis diagonal
// of rho and `rho` holds the full matrix.
struct SteadyStateReport {
    std::string method = "PME";
    Eigen::VectorXd populations;
    Eigen::VectorXd site_populations;  // flat site order, ground excluded
    Eigen::MatrixXcd rho;              // BRME only, eigenbasis
    double current = 0.0;
    double current_from_flux = 0.0;
    KindFluxes fluxes{};  // net ground-ward flux per channel kind
    double residual = 0.0;
    double residual_bound = 0.0;
    double ground_population = 0.0;
    double sigma_min = 0.0;
    double sigma_next = 0.0;
    double rcond = 0.0;                 // BRME only, bordered system
    double coherence_ratio = 0.0;       // BRME only
    double min_rho_eigenvalue = 0.0;    // BRME only
    std::vector<std::string> warnings;

    double flux_imbalance() const;  // |inj - (ext + rad + nr)| / inj
};

// I = sum_n P_n sum_ext gamma_ext |<x_ext|phi_n>|^2.
double steady_current(const Eigen::VectorXd& populations, const EigenSystem& es,
                      const std::vector<Channel>& channels);

// Net flux into ground per kind: sum_n W(g, n) P_n - W(n, g) P_g.
KindFluxes flux_report(const Eigen::VectorXd& populations, const RateMatrix& w);

Eigen::VectorXd site_populations(const Eigen::VectorXd& populations, const EigenSystem& es);

// Diagonalized eigen system plus channels, the input shared by both solvers.
struct NetworkModel {
    EigenSystem es;
    std::vector<Channel> channels;  // resolved against es
};

NetworkModel build_model(const Hamiltonian& h, const EnvironmentParams& env, InjectionMode mode);

SteadyStateReport solve_pme(const NetworkModel& model, Exec exec = Exec::Parallel);

nlohmann::json report_to_json(const SteadyStateReport& r);

}  // namespace darkchain
