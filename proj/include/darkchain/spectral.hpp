#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "darkchain/environment.hpp"
#include "darkchain/hamiltonian.hpp"
#include "darkchain/kernels.hpp"

namespace darkchain {

// Eigenstates of the system Hamiltonian. Columns of `vectors` are states in
// the [ground] ++ sites basis, ordered by ascending energy; state 0 is the
// decoupled ground state.
struct EigenSystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd brightness;  // size dim(); zero for ground and until computed
    Geometry geometry;
    HamiltonianParams params;

    int dim() const { return static_cast<int>(energies.size()); }
    int n_sites() const { return dim() - 1; }
    static constexpr int ground = 0;
    Eigen::Ref<const Eigen::MatrixXd> site_amplitudes() const { return vectors.bottomRows(n_sites()); }
};

inline constexpr double kDegeneracyTol = 1e-9;

EigenSystem diagonalize(const Hamiltonian& h, double degeneracy_tol = kDegeneracyTol);

// B_n = gamma_rad^2 |<g|A_rad|phi_n>|^2, summed over Cartesian components.
Eigen::VectorXd brightness(const EigenSystem& es, const std::vector<Channel>& channels);

// Fixes EigenTarget channels to explicit operators |phi><g| + |g><phi|.
std::vector<Channel> resolve_channels(const std::vector<Channel>& channels, const EigenSystem& es);

struct RateMatrix {
    Eigen::MatrixXd total;                         // W(n, m): rate m -> n
    std::array<Eigen::MatrixXd, kChannelKinds> by_kind;

    const Eigen::MatrixXd& of(ChannelKind k) const { return by_kind[static_cast<int>(k)]; }
    int dim() const { return static_cast<int>(total.rows()); }
};

RateMatrix transition_matrix(const EigenSystem& es, const std::vector<Channel>& channels,
                             Exec exec = Exec::Parallel);

struct RelaxationProfile {
    Eigen::VectorXd downhill;  // sum of phonon rates into lower states
    int bottleneck = -1;       // slowest excited state above the lowest one
};

RelaxationProfile relaxation_profile(const RateMatrix& w, const EigenSystem& es);

struct BrightDarkCensus {
    int bright = 0;
    int dark = 0;
    std::vector<int> bright_states;
    std::vector<int> dark_states;
    double threshold = 0.0;  // absolute brightness cut
    // min E(bright) - max E(dark); negative when the bands overlap
    double band_gap = 0.0;
};

BrightDarkCensus classify_bright_dark(const EigenSystem& es, double threshold_fraction = 1e-6);

}  // namespace darkchain
