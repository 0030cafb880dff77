#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "darkchain/environment.hpp"

// Hot loops of the rate-matrix and Redfield-tensor assembly. Each kernel has a
// straightforward serial reference (dense, formula-for-formula) kept for
// testing, and an OpenMP implementation that exploits operator sparsity.
namespace darkchain {

enum class Exec { Serial, Parallel };

namespace kernels {

using KindMatrices = std::array<Eigen::MatrixXd, kChannelKinds>;

// S(i, j) = S(e_i - e_j); differences below `tol` are snapped to exactly 0.
Eigen::MatrixXd spectral_matrix(const SpectralDensity& s, const Eigen::VectorXd& energies, double tol);

// <phi_m|A|phi_n> for all m, n, exploiting the entry list.
Eigen::MatrixXd eigenbasis_operator(const Channel& c, const Eigen::MatrixXd& vectors);

// W^kind(n, m) += S(e_m - e_n) |<phi_m|A|phi_n>|^2 over all channels.
void accumulate_rates_reference(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& energies,
                                const std::vector<Channel>& channels, double tol, KindMatrices& out);
void accumulate_rates_parallel(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& energies,
                               const std::vector<Channel>& channels, double tol, KindMatrices& out);

// Channels sharing one spectral density, operators already in the eigenbasis.
// spectrum(c, a) = S(w_ca) with w_ca = e_c - e_a on the grouped frequency grid.
struct RedfieldGroup {
    ChannelKind kind = ChannelKind::Phonon;
    std::vector<Eigen::MatrixXd> ops;
    Eigen::MatrixXd spectrum;
};

// Superoperator on row-major vec(rho) (index a*D + b), eigenbasis:
// -i[H, rho] + sum_groups R_group rho.
Eigen::MatrixXcd redfield_reference(const Eigen::VectorXd& energies, const std::vector<RedfieldGroup>& groups);
Eigen::MatrixXcd redfield_parallel(const Eigen::VectorXd& energies, const std::vector<RedfieldGroup>& groups);

// Row (g, g) of one group's dissipator: d rho_gg / dt = row . vec(rho).
Eigen::VectorXd redfield_ground_row(const RedfieldGroup& group, int dim);

}  // namespace kernels
}  // namespace darkchain
