#include "darkchain/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "darkchain/errors.hpp"
#include "darkchain/rng.hpp"

namespace darkchain {

void validate(const HamiltonianParams& p) {
    if (p.Ja != 1.0) throw InvalidParameter("Ja is the energy unit and must be exactly 1");
    if (!std::isfinite(p.delta_E) || !std::isfinite(p.E0) || !std::isfinite(p.Eg) || !std::isfinite(p.Jb))
        throw InvalidParameter("Hamiltonian parameters must be finite");
}

double dipole_coupling(const Vec3& r_i, const Vec3& d_i, const Vec3& r_j, const Vec3& d_j, double J) {
    const Vec3 sep = r_i - r_j;
    const double r = sep.norm();
    if (!(r > 0.0)) throw NumericalError("dipole coupling between coincident sites");
    const Vec3 u = sep / r;
    return J * (d_i.dot(d_j) - 3.0 * d_i.dot(u) * d_j.dot(u)) / (r * r * r);
}

Hamiltonian build_hamiltonian(const Geometry& geometry, const HamiltonianParams& params) {
    validate(params);
    if (params.dipole_mode && !geometry.has_dipoles())
        throw InvalidDipole("dipole mode requested but geometry has no dipoles");

    const int n = geometry.sites_per_cell;
    const int N = geometry.n_cells;
    const int m = geometry.n_sites();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m + 1);
    H(0, 0) = params.Eg;

    for (int a = 0; a < m; ++a) {
        const int mu = a / n + 1;
        H(a + 1, a + 1) = (N - mu) * params.delta_E + params.E0;
    }
    // upper triangle, mirrored so the matrix is exactly symmetric
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            const bool same_cell = (a / n) == (b / n);
            const double J = same_cell ? params.Jb : params.Ja;
            double v;
            if (params.dipole_mode) {
                v = dipole_coupling(geometry.positions[a], (*geometry.dipoles)[a], geometry.positions[b],
                                    (*geometry.dipoles)[b], J);
            } else {
                const double r = (geometry.positions[a] - geometry.positions[b]).norm();
                if (!(r > 0.0)) throw NumericalError("coincident sites in geometry");
                v = J / (r * r * r);
            }
            H(a + 1, b + 1) = v;
            H(b + 1, a + 1) = v;
        }
    }
    return {std::move(H), geometry, params};
}

std::vector<double> disorder_offsets(const DisorderSpec& spec, int n_sites) {
    if (!(spec.sigma >= 0.0)) throw InvalidParameter("disorder sigma must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(n_sites), 0.0);
    if (spec.sigma == 0.0) return out;
    const CounterRng rng(hash_combine(spec.seed, spec.realization_index));
    for (int s = 0; s < n_sites; ++s) out[s] = spec.sigma * rng.normal_at(static_cast<std::uint64_t>(s));
    return out;
}

Hamiltonian apply_disorder(Hamiltonian h, const DisorderSpec& spec) {
    const auto offsets = disorder_offsets(spec, h.geometry.n_sites());
    if (spec.sigma == 0.0) return h;
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        const int row = Hamiltonian::row_of_site(static_cast<int>(s));
        h.matrix(row, row) += offsets[s];
    }
    return h;
}

nlohmann::json params_to_json(const HamiltonianParams& p) {
    return {{"delta_E", p.delta_E}, {"E0", p.E0}, {"Eg", p.Eg},
            {"Ja", p.Ja},           {"Jb", p.Jb}, {"dipole_mode", p.dipole_mode}};
}

}  // namespace darkchain
