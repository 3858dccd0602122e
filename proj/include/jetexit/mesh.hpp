#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "jetexit/geometry.hpp"

namespace jetexit {

using Triangle = std::array<std::size_t, 3>;

/// Piecewise-linear computational grid. Triangles are counterclockwise.
/// `markers` has one entry per vertex. For a jet core, `periodic_pairs` holds
/// (left, right) vertex pairs with right = left + (period, 0).
struct TriangleMesh {
    std::vector<PhasePoint> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryMarker> markers;
    std::vector<std::pair<std::size_t, std::size_t>> periodic_pairs;
    double h_max = 0.0;
    /// Domain the mesh was built on; used to project refined boundary points.
    std::shared_ptr<const DomainSpec> domain;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
    double signed_area(std::size_t t) const;
};

struct MeshQuality {
    double min_angle_deg = 0.0;
    double max_angle_deg = 0.0;
    /// Longest edge times perimeter over 4 sqrt(3) area; 1 for equilateral.
    double max_aspect_ratio = 0.0;
    double h_max = 0.0;
    double h_min = 0.0;
    double total_area = 0.0;
    std::size_t worst_triangle = 0;
};

MeshQuality mesh_quality(const TriangleMesh& m);

/// Edge-incidence check: every edge has one or two triangles and every
/// single-triangle edge joins boundary or periodic-side vertices.
bool is_conforming(const TriangleMesh& m);

/// Throws MeshQualityError naming the worst triangle if any signed area <= 0.
void check_orientation(const TriangleMesh& m);

/// Regular polar grid on a reference ellipse mapped onto the eddy by a radial
/// blend about d.center: ring j at blend factor j / n_radial, angle theta
/// landing on the boundary point with x = x_mid + half_width cos(theta).
/// n_angular must be even and >= 8; n_radial >= 2.
TriangleMesh mesh_eddy(const DomainSpec& d, int n_radial, int n_angular);

/// n_x x n_y grid on a reference rectangle mapped by vertical transfinite
/// interpolation between the lower and upper boundary chains; the two cut
/// columns become periodic pairs. n_x >= 8, n_y >= 4.
TriangleMesh mesh_jet_core(const DomainSpec& d, int n_x, int n_y);

/// Splits every triangle into four at edge midpoints. Boundary midpoints are
/// projected onto the splines of `m.domain`: to the closest point for an
/// eddy, vertically for a jet core.
TriangleMesh refine_uniform(const TriangleMesh& m);

/// Laplacian smoothing of interior, non-periodic vertices; boundary fixed.
void smooth_laplacian(TriangleMesh& m, int sweeps);

/// Sum of P1 triangle areas.
double mesh_area(const TriangleMesh& m);

}  // namespace jetexit
