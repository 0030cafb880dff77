#include "darkchain/lattice.hpp"

#include <cmath>

#include <json.hpp>

#include "darkchain/errors.hpp"

namespace darkchain {

UnitCellKind UnitCellKind::custom(std::vector<std::array<double, 2>> coords) {
    UnitCellKind k;
    k.shape = CellShape::Custom;
    k.custom_coords = std::move(coords);
    return k;
}

int UnitCellKind::sites() const {
    switch (shape) {
        case CellShape::Mono: return 1;
        case CellShape::Dimer: return 2;
        case CellShape::Trimer: return 3;
        case CellShape::Prism: return 3;
        case CellShape::Cuboid: return 4;
        case CellShape::Custom: return static_cast<int>(custom_coords.size());
    }
    return 0;
}

std::string UnitCellKind::name() const {
    switch (shape) {
        case CellShape::Mono: return "mono";
        case CellShape::Dimer: return "dimer";
        case CellShape::Trimer: return "trimer";
        case CellShape::Prism: return "prism";
        case CellShape::Cuboid: return "cuboid";
        case CellShape::Custom: return "custom";
    }
    return "unknown";
}

std::vector<std::array<double, 2>> UnitCellKind::layout() const {
    switch (shape) {
        case CellShape::Mono: return {{0.0, 0.0}};
        case CellShape::Dimer: return {{-0.5, 0.0}, {0.5, 0.0}};
        // collinear: three parallel chains
        case CellShape::Trimer: return {{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
        case CellShape::Prism: {
            // equilateral triangle of side 1 centred on the axis
            const double r = 1.0 / std::sqrt(3.0);
            std::vector<std::array<double, 2>> out;
            for (int k = 0; k < 3; ++k) {
                const double a = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
                out.push_back({r * std::cos(a), r * std::sin(a)});
            }
            return out;
        }
        case CellShape::Cuboid: return {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
        case CellShape::Custom: return custom_coords;
    }
    return {};
}

std::optional<CellShape> parse_cell_shape(const std::string& name) {
    if (name == "mono") return CellShape::Mono;
    if (name == "dimer") return CellShape::Dimer;
    if (name == "trimer") return CellShape::Trimer;
    if (name == "prism") return CellShape::Prism;
    if (name == "cuboid" || name == "cube") return CellShape::Cuboid;
    if (name == "custom") return CellShape::Custom;
    return std::nullopt;
}

Geometry build_geometry(const UnitCellKind& kind, int n_cells) {
    if (n_cells < 1) throw InvalidGeometry("n_cells must be >= 1, got " + std::to_string(n_cells));
    const auto cell = kind.layout();
    if (cell.empty()) throw InvalidGeometry("unit cell has no sites");
    for (std::size_t a = 0; a < cell.size(); ++a)
        for (std::size_t b = a + 1; b < cell.size(); ++b)
            if (cell[a][0] == cell[b][0] && cell[a][1] == cell[b][1])
                throw InvalidGeometry("duplicate in-cell coordinate at slots " + std::to_string(a + 1) +
                                      " and " + std::to_string(b + 1));

    Geometry g;
    g.kind = kind;
    g.n_cells = n_cells;
    g.sites_per_cell = static_cast<int>(cell.size());
    g.positions.reserve(static_cast<std::size_t>(n_cells) * cell.size());
    for (int mu = 0; mu < n_cells; ++mu)
        for (const auto& c : cell) g.positions.emplace_back(static_cast<double>(mu), c[0], c[1]);
    return g;
}

namespace {

Vec3 normalized_or_throw(const Vec3& v, int site) {
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw InvalidDipole("dipole for site " + std::to_string(site) + " is zero or non-finite");
    return v / norm;
}

}  // namespace

Geometry assign_dipoles(Geometry geometry, const DipoleScheme& scheme) {
    const int n = geometry.n_sites();
    std::vector<Vec3> d(static_cast<std::size_t>(n));
    if (std::holds_alternative<AllAlongTransport>(scheme)) {
        for (auto& v : d) v = Vec3::UnitX();
    } else if (const auto* ax = std::get_if<AllAlongAxis>(&scheme)) {
        const Vec3 u = normalized_or_throw(ax->axis, 0);
        for (auto& v : d) v = u;
    } else {
        const auto& list = std::get<PerSite>(scheme).dipoles;
        if (static_cast<int>(list.size()) != n)
            throw InvalidDipole("per-site dipole list has " + std::to_string(list.size()) +
                                " entries for " + std::to_string(n) + " sites");
        for (int s = 0; s < n; ++s) d[s] = normalized_or_throw(list[s], s);
    }
    geometry.dipoles = std::move(d);
    return geometry;
}

Eigen::MatrixXd distance_matrix(const Geometry& g) {
    const int n = g.n_sites();
    Eigen::MatrixXd dist(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dist(a, b) = (g.positions[a] - g.positions[b]).norm();
    return dist;
}

nlohmann::json geometry_to_json(const Geometry& g) {
    nlohmann::json sites = nlohmann::json::array();
    for (int s = 0; s < g.n_sites(); ++s) {
        const auto idx = site_of(s, g.sites_per_cell);
        const auto& p = g.positions[s];
        nlohmann::json site = {{"cell", idx.cell}, {"slot", idx.slot}, {"pos", {p.x(), p.y(), p.z()}}};
        if (g.dipoles) {
            const auto& d = (*g.dipoles)[s];
            site["dipole"] = {d.x(), d.y(), d.z()};
        } else {
            site["dipole"] = nullptr;
        }
        sites.push_back(std::move(site));
    }
    return {{"kind", g.kind.name()}, {"n_cells", g.n_cells}, {"sites", std::move(sites)}};
}

}  // namespace darkchain
