#pragma once

#include <vector>

#include <Eigen/Dense>

#include "darkchain/kernels.hpp"
#include "darkchain/pme.hpp"
#include "darkchain/spectral.hpp"

namespace darkchain {

inline constexpr double kFrequencyTol = 1e-9;

// omega(c, a) = e_c - e_a with differences within `tol` of each other merged
// onto one representative (exactly 0 for the degenerate cluster).
Eigen::MatrixXd frequency_grid(const Eigen::VectorXd& energies, double tol = kFrequencyTol);

// Sorted distinct transition frequencies on the grid.
std::vector<double> distinct_frequencies(const Eigen::VectorXd& energies, double tol = kFrequencyTol);

struct FrequencyComponent {
    double omega;
    Eigen::MatrixXd op;  // eigenbasis; nonzero only where e_m - e_n = omega
};

// A(omega) = sum_{e_m - e_n = omega} |phi_n><phi_n|A|phi_m><phi_m|, nonzero components only.
std::vector<FrequencyComponent> frequency_decompose(const EigenSystem& es, const Channel& c,
                                                    double tol = kFrequencyTol);

struct LiouvillianOptions {
    long max_dim2 = 3721;  // refuse D^2 above this
    double freq_tol = kFrequencyTol;
    double positivity_warn = -1e-8;
    double positivity_fail = -1e-6;
    Exec exec = Exec::Parallel;
};

// Superoperator on row-major vec(rho) in the eigenbasis.
struct Liouvillian {
    Eigen::MatrixXcd L;
    int D = 0;
    // d rho_gg / dt contribution of each channel kind: rows[k] . vec(rho)
    std::array<Eigen::VectorXd, kChannelKinds> ground_rows;
    LiouvillianOptions options;
};

Liouvillian build_liouvillian(const EigenSystem& es, const std::vector<Channel>& channels,
                              const LiouvillianOptions& opt = {});

SteadyStateReport brme_steady_state(const Liouvillian& l, const EigenSystem& es,
                                    const std::vector<Channel>& channels);

SteadyStateReport solve_brme(const NetworkModel& model, const LiouvillianOptions& opt = {});

}  // namespace darkchain
