#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "darkchain/hamiltonian.hpp"
#include "darkchain/lattice.hpp"

namespace darkchain {

struct DrudeLorentzParams {
    double gamma_vib = 0.01;
    double Gamma = 0.4;
    double omega0 = 0.0;
    double T_ph = 2.5875;
    bool operator==(const DrudeLorentzParams&) const = default;
};

enum class StepDirection { Up, Down };

struct StepParams {
    double gamma = 0.0;
    StepDirection direction = StepDirection::Up;
    bool operator==(const StepParams&) const = default;
};

// pi|w| Gamma gamma_vib / (Gamma^2 + (|w| - w0)^2) * [n_BE(|w|, T) + Theta(w)],
// with the finite w -> 0 limit.
double drude_lorentz(double omega, const DrudeLorentzParams& p);

// gamma on the open half-line selected by `direction`, zero elsewhere and at 0.
double step_spectrum(double omega, double gamma, StepDirection direction);

class SpectralDensity {
public:
    SpectralDensity() = default;
    static SpectralDensity drude_lorentz(const DrudeLorentzParams& p) { return SpectralDensity(p); }
    static SpectralDensity step(double gamma, StepDirection d) { return SpectralDensity(StepParams{gamma, d}); }

    double operator()(double omega) const;

    bool is_step() const { return std::holds_alternative<StepParams>(v_); }
    const StepParams& step_params() const { return std::get<StepParams>(v_); }
    const DrudeLorentzParams& drude_params() const { return std::get<DrudeLorentzParams>(v_); }
    // Plateau value for step spectra, 0 for Drude-Lorentz.
    double plateau() const { return is_step() ? step_params().gamma : 0.0; }
    bool identically_zero() const { return is_step() && step_params().gamma == 0.0; }

    bool operator==(const SpectralDensity&) const = default;
    nlohmann::json to_json() const;

private:
    explicit SpectralDensity(std::variant<DrudeLorentzParams, StepParams> v) : v_(v) {}
    std::variant<DrudeLorentzParams, StepParams> v_{StepParams{}};
};

enum class ChannelKind { Phonon = 0, Radiative = 1, NonRadiative = 2, Injection = 3, Extraction = 4 };
inline constexpr int kChannelKinds = 5;
const char* to_string(ChannelKind k);

enum class EigenTarget { None, Highest, Lowest };
enum class InjectionMode { SiteBasis, EigenBasis };

// One matrix element of a channel operator in the [ground] ++ sites basis.
struct OperatorEntry {
    int row;
    int col;
    double value;
};

// System-environment channel. The operator is Hermitian and stored as its
// full list of nonzero entries; uni-directionality lives in the spectrum.
struct Channel {
    ChannelKind kind = ChannelKind::Phonon;
    int site = -1;  // flat site for site-local channels
    int axis = -1;  // Cartesian component for dipole-weighted radiative channels
    EigenTarget target = EigenTarget::None;
    std::vector<OperatorEntry> entries;
    SpectralDensity spectral;

    bool resolved() const { return target == EigenTarget::None || !entries.empty(); }
    Eigen::MatrixXd dense(int dim) const;
    // Excited-manifold vector x for ground<->excited channels A = |g><x| + |x><g|.
    Eigen::VectorXd excited_vector(int dim) const;
    std::string label() const;
};

struct EnvironmentParams {
    double gamma_rad = 0.01;
    double gamma_nr = 0.0;
    double gamma_phonon = 0.01;
    double T_ph = 2.5875;
    double Gamma = 0.4;
    double gamma_inj = 1e-6;
    double gamma_ext = 0.021;
};

void validate(const EnvironmentParams& p);

// omega0^2 = dE^2 - Gamma^2 puts the phonon peak at transitions of size dE.
double optimal_omega0(double delta_E, double Gamma);

DrudeLorentzParams phonon_params(const EnvironmentParams& env, double delta_E);

std::vector<Channel> build_channels(const Geometry& geometry, const HamiltonianParams& hparams,
                                    const EnvironmentParams& env, InjectionMode mode);

nlohmann::json env_to_json(const EnvironmentParams& p);
nlohmann::json channels_summary(const std::vector<Channel>& channels);

}  // namespace darkchain
