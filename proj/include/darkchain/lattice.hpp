#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace darkchain {

using Vec3 = Eigen::Vector3d;

enum class CellShape { Mono, Dimer, Trimer, Prism, Cuboid, Custom };

// Unit-cell layout in the (y, z) plane orthogonal to the transport axis x.
struct UnitCellKind {
    CellShape shape = CellShape::Mono;
    std::vector<std::array<double, 2>> custom_coords;  // only for Custom

    static UnitCellKind custom(std::vector<std::array<double, 2>> coords);

    int sites() const;
    std::string name() const;
    // In-cell (y, z) coordinates, nearest-neighbour spacing 1.
    std::vector<std::array<double, 2>> layout() const;
};

std::optional<CellShape> parse_cell_shape(const std::string& name);

// 1-based (cell mu, slot i) address of a site.
struct SiteIndex {
    int cell = 1;
    int slot = 1;
    bool operator==(const SiteIndex&) const = default;
};

// 0-based flat index (mu-1)*n + (i-1).
inline int flat_index(SiteIndex s, int sites_per_cell) {
    return (s.cell - 1) * sites_per_cell + (s.slot - 1);
}
inline SiteIndex site_of(int flat, int sites_per_cell) {
    return {flat / sites_per_cell + 1, flat % sites_per_cell + 1};
}

struct Geometry {
    UnitCellKind kind;
    int n_cells = 0;
    int sites_per_cell = 0;
    std::vector<Vec3> positions;              // flat site order
    std::optional<std::vector<Vec3>> dipoles;  // unit vectors when present

    int n_sites() const { return static_cast<int>(positions.size()); }
    bool has_dipoles() const { return dipoles.has_value(); }
};

Geometry build_geometry(const UnitCellKind& kind, int n_cells);

struct AllAlongTransport {};
struct AllAlongAxis {
    Vec3 axis;
};
struct PerSite {
    std::vector<Vec3> dipoles;
};
using DipoleScheme = std::variant<AllAlongTransport, AllAlongAxis, PerSite>;

Geometry assign_dipoles(Geometry geometry, const DipoleScheme& scheme);

// Pairwise distance matrix, used by tests and exports.
Eigen::MatrixXd distance_matrix(const Geometry& g);

nlohmann::json geometry_to_json(const Geometry& g);

}  // namespace darkchain
