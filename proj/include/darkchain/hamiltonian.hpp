#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "darkchain/lattice.hpp"

namespace darkchain {

// Dimensionless energies in units of the inter-cell coupling (Ja = 1).
struct HamiltonianParams {
    double delta_E = 1.0;
    double E0 = 100.0;
    double Eg = 0.0;
    double Ja = 1.0;
    double Jb = 1.0;
    bool dipole_mode = false;
};

// Dense system Hamiltonian over [ground] ++ flat site order.
struct Hamiltonian {
    static constexpr int ground = 0;

    Eigen::MatrixXd matrix;
    Geometry geometry;
    HamiltonianParams params;

    int dim() const { return static_cast<int>(matrix.rows()); }
    static int row_of_site(int flat_site) { return flat_site + 1; }
};

struct DisorderSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t realization_index = 0;
};

// J [d_i.d_j - 3 (d_i.r)(d_j.r)] / |r_i - r_j|^3 with r the unit separation.
double dipole_coupling(const Vec3& r_i, const Vec3& d_i, const Vec3& r_j, const Vec3& d_j, double J);

Hamiltonian build_hamiltonian(const Geometry& geometry, const HamiltonianParams& params);

// Gaussian on-site offsets for every site in flat order.
std::vector<double> disorder_offsets(const DisorderSpec& spec, int n_sites);

Hamiltonian apply_disorder(Hamiltonian h, const DisorderSpec& spec);

void validate(const HamiltonianParams& p);

nlohmann::json params_to_json(const HamiltonianParams& p);

}  // namespace darkchain
