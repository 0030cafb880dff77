#include "darkchain/environment.hpp"

#include <cmath>
#include <map>

#include "darkchain/errors.hpp"

namespace darkchain {

double drude_lorentz(double omega, const DrudeLorentzParams& p) {
    const double w = std::abs(omega);
    const double g2 = p.Gamma * p.Gamma;
    if (w == 0.0) return M_PI * p.Gamma * p.gamma_vib * p.T_ph / (g2 + p.omega0 * p.omega0);
    const double lorentz = M_PI * w * p.Gamma * p.gamma_vib / (g2 + (w - p.omega0) * (w - p.omega0));
    const double n_be = 1.0 / std::expm1(w / p.T_ph);
    return lorentz * (n_be + (omega > 0.0 ? 1.0 : 0.0));
}

double step_spectrum(double omega, double gamma, StepDirection direction) {
    if (direction == StepDirection::Up) return omega > 0.0 ? gamma : 0.0;
    return omega < 0.0 ? gamma : 0.0;
}

double SpectralDensity::operator()(double omega) const {
    if (const auto* s = std::get_if<StepParams>(&v_)) return step_spectrum(omega, s->gamma, s->direction);
    return darkchain::drude_lorentz(omega, std::get<DrudeLorentzParams>(v_));
}

nlohmann::json SpectralDensity::to_json() const {
    if (const auto* s = std::get_if<StepParams>(&v_))
        return {{"type", s->direction == StepDirection::Up ? "step_up" : "step_down"}, {"gamma", s->gamma}};
    const auto& d = std::get<DrudeLorentzParams>(v_);
    return {{"type", "drude_lorentz"}, {"gamma_vib", d.gamma_vib}, {"Gamma", d.Gamma},
            {"omega0", d.omega0},      {"T_ph", d.T_ph}};
}

const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::Phonon: return "phonon";
        case ChannelKind::Radiative: return "radiative";
        case ChannelKind::NonRadiative: return "nonradiative";
        case ChannelKind::Injection: return "injection";
        case ChannelKind::Extraction: return "extraction";
    }
    return "unknown";
}

Eigen::MatrixXd Channel::dense(int dim) const {
    if (!resolved()) throw InvalidParameter("channel " + label() + " targets an eigenstate but was never resolved");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& e : entries) A(e.row, e.col) += e.value;
    return A;
}

Eigen::VectorXd Channel::excited_vector(int dim) const {
    if (!resolved()) throw InvalidParameter("channel " + label() + " targets an eigenstate but was never resolved");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    for (const auto& e : entries)
        if (e.row == 0 && e.col != 0) x(e.col) += e.value;
    return x;
}

std::string Channel::label() const {
    std::string s = to_string(kind);
    if (target == EigenTarget::Highest) return s + "(eigen:highest)";
    if (target == EigenTarget::Lowest) return s + "(eigen:lowest)";
    if (site >= 0) s += "(site " + std::to_string(site) + ")";
    if (axis >= 0) s += std::string("[") + "xyz"[axis] + "]";
    return s;
}

void validate(const EnvironmentParams& p) {
    for (double r : {p.gamma_rad, p.gamma_nr, p.gamma_phonon, p.gamma_inj, p.gamma_ext})
        if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("channel rates must be finite and >= 0");
    if (!(p.T_ph > 0.0)) throw InvalidParameter("T_ph must be > 0");
    if (!(p.Gamma > 0.0)) throw InvalidParameter("Gamma must be > 0");
}

double optimal_omega0(double delta_E, double Gamma) {
    const double w2 = delta_E * delta_E - Gamma * Gamma;
    if (!(w2 >= 0.0)) throw InvalidParameter("need |delta_E| >= Gamma for omega0^2 = dE^2 - Gamma^2");
    return std::sqrt(w2);
}

DrudeLorentzParams phonon_params(const EnvironmentParams& env, double delta_E) {
    return {env.gamma_phonon, env.Gamma, optimal_omega0(delta_E, env.Gamma), env.T_ph};
}

namespace {

void add_ground_link(Channel& c, int site, double amp) {
    c.entries.push_back({0, site + 1, amp});
    c.entries.push_back({site + 1, 0, amp});
}

}  // namespace

std::vector<Channel> build_channels(const Geometry& geometry, const HamiltonianParams& hparams,
                                    const EnvironmentParams& env, InjectionMode mode) {
    validate(env);
    const int m = geometry.n_sites();
    const int n = geometry.sites_per_cell;
    const int N = geometry.n_cells;
    if (hparams.dipole_mode && !geometry.has_dipoles())
        throw InvalidDipole("dipole mode requested but geometry has no dipoles");

    std::vector<Channel> out;
    out.reserve(static_cast<std::size_t>(2 * m + 2 * n + 3));

    const auto phonon = SpectralDensity::drude_lorentz(phonon_params(env, hparams.delta_E));
    for (int s = 0; s < m; ++s) {
        Channel c;
        c.kind = ChannelKind::Phonon;
        c.site = s;
        c.entries.push_back({s + 1, s + 1, 1.0});
        c.spectral = phonon;
        out.push_back(std::move(c));
    }

    const auto rad = SpectralDensity::step(env.gamma_rad, StepDirection::Up);
    if (hparams.dipole_mode) {
        for (int k = 0; k < 3; ++k) {
            Channel c;
            c.kind = ChannelKind::Radiative;
            c.axis = k;
            for (int s = 0; s < m; ++s) {
                const double amp = (*geometry.dipoles)[s](k);
                if (amp != 0.0) add_ground_link(c, s, amp);
            }
            c.spectral = rad;
            out.push_back(std::move(c));
        }
    } else {
        Channel c;
        c.kind = ChannelKind::Radiative;
        for (int s = 0; s < m; ++s) add_ground_link(c, s, 1.0);
        c.spectral = rad;
        out.push_back(std::move(c));
    }

    const auto nr = SpectralDensity::step(env.gamma_nr, StepDirection::Up);
    for (int s = 0; s < m; ++s) {
        Channel c;
        c.kind = ChannelKind::NonRadiative;
        c.site = s;
        add_ground_link(c, s, 1.0);
        c.spectral = nr;
        out.push_back(std::move(c));
    }

    if (mode == InjectionMode::SiteBasis) {
        // total injection rate independent of the cell size
        const auto inj = SpectralDensity::step(env.gamma_inj / n, StepDirection::Down);
        for (int i = 0; i < n; ++i) {
            Channel c;
            c.kind = ChannelKind::Injection;
            c.site = i;
            add_ground_link(c, i, 1.0);
            c.spectral = inj;
            out.push_back(std::move(c));
        }
        const auto ext = SpectralDensity::step(env.gamma_ext, StepDirection::Up);
        for (int i = 0; i < n; ++i) {
            Channel c;
            c.kind = ChannelKind::Extraction;
            c.site = (N - 1) * n + i;
            add_ground_link(c, c.site, 1.0);
            c.spectral = ext;
            out.push_back(std::move(c));
        }
    } else {
        Channel inj;
        inj.kind = ChannelKind::Injection;
        inj.target = EigenTarget::Highest;
        inj.spectral = SpectralDensity::step(env.gamma_inj, StepDirection::Down);
        out.push_back(std::move(inj));
        Channel ext;
        ext.kind = ChannelKind::Extraction;
        ext.target = EigenTarget::Lowest;
        ext.spectral = SpectralDensity::step(env.gamma_ext, StepDirection::Up);
        out.push_back(std::move(ext));
    }
    return out;
}

nlohmann::json env_to_json(const EnvironmentParams& p) {
    return {{"gamma_rad", p.gamma_rad}, {"gamma_nr", p.gamma_nr}, {"gamma_phonon", p.gamma_phonon},
            {"T_ph", p.T_ph},           {"Gamma", p.Gamma},       {"gamma_inj", p.gamma_inj},
            {"gamma_ext", p.gamma_ext}};
}

nlohmann::json channels_summary(const std::vector<Channel>& channels) {
    std::map<std::string, int> counts;
    std::map<std::string, nlohmann::json> spectra;
    for (const auto& c : channels) {
        const std::string k = to_string(c.kind);
        ++counts[k];
        spectra[k] = c.spectral.to_json();
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [k, count] : counts) out.push_back({{"kind", k}, {"count", count}, {"spectral", spectra[k]}});
    return out;
}

}  // namespace darkchain
