#include "jetexit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

constexpr double kPi = std::numbers::pi;

using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, int> edge_incidence(const TriangleMesh& m) {
    std::map<Edge, int> count;
    for (const Triangle& t : m.triangles) {
        for (int e = 0; e < 3; ++e) ++count[make_edge(t[e], t[(e + 1) % 3])];
    }
    return count;
}

double longest_edge(const TriangleMesh& m) {
    double h = 0.0;
    for (const Triangle& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            h = std::max(h, distance(m.vertices[t[e]], m.vertices[t[(e + 1) % 3]]));
        }
    }
    return h;
}

// Closest point on the marker's splines; Newton on (s(t) - q) . s'(t) from
// the nearest knot.
std::optional<PhasePoint> closest_on_boundary(const DomainSpec& d, BoundaryMarker mk, PhasePoint q) {
    std::optional<PhasePoint> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const BoundarySegment& seg : d.segments) {
        if (seg.marker != mk) continue;
        const CubicSpline2& sp = seg.curve.spline;
        const auto& knots = sp.knots();
        std::size_t k0 = 0;
        double d0 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < knots.size(); ++k) {
            const double dk = distance(sp.eval(knots[k]), q);
            if (dk < d0) {
                d0 = dk;
                k0 = k;
            }
        }
        double t = knots[k0];
        for (int it = 0; it < 30; ++it) {
            const PhasePoint r = sp.eval(t) - q;
            const PhasePoint d1 = sp.derivative(t);
            const PhasePoint d2 = sp.second_derivative(t);
            const double g = r.x * d1.x + r.y * d1.y;
            const double h = d1.x * d1.x + d1.y * d1.y + r.x * d2.x + r.y * d2.y;
            if (h <= 0.0) break;
            const double step = g / h;
            t = std::clamp(t - step, knots.front(), knots.back());
            if (std::abs(step) < 1e-14 * sp.length_parameter()) break;
        }
        const PhasePoint c = sp.eval(t);
        if (distance(c, q) < best_dist) {
            best_dist = distance(c, q);
            best = c;
        }
    }
    return best;
}

// Adds the two triangles of quad (a, b, c, d), counterclockwise, split along
// the shorter diagonal.
void add_quad(TriangleMesh& m, std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const double ac = distance(m.vertices[a], m.vertices[c]);
    const double bd = distance(m.vertices[b], m.vertices[d]);
    if (ac <= bd) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
    } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
    }
}

}  // namespace

double TriangleMesh::signed_area(std::size_t t) const {
    const Triangle& tri = triangles[t];
    return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double mesh_area(const TriangleMesh& m) {
    double area = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) area += m.signed_area(t);
    return area;
}

MeshQuality mesh_quality(const TriangleMesh& m) {
    MeshQuality q;
    q.min_angle_deg = 180.0;
    q.h_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const Triangle& tri = m.triangles[t];
        const double area = m.signed_area(t);
        q.total_area += area;
        double perimeter = 0.0;
        double longest = 0.0;
        double tri_min = 180.0;
        for (int e = 0; e < 3; ++e) {
            const PhasePoint p0 = m.vertices[tri[e]];
            const PhasePoint p1 = m.vertices[tri[(e + 1) % 3]];
            const PhasePoint p2 = m.vertices[tri[(e + 2) % 3]];
            const double len = distance(p0, p1);
            perimeter += len;
            longest = std::max(longest, len);
            q.h_max = std::max(q.h_max, len);
            q.h_min = std::min(q.h_min, len);
            const PhasePoint u = p1 - p0;
            const PhasePoint v = p2 - p0;
            const double angle = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / kPi;
            tri_min = std::min(tri_min, angle);
            q.max_angle_deg = std::max(q.max_angle_deg, angle);
        }
        if (tri_min < q.min_angle_deg) {
            q.min_angle_deg = tri_min;
            q.worst_triangle = t;
        }
        const double aspect = area > 0.0 ? longest * perimeter / (4.0 * std::sqrt(3.0) * area)
                                         : std::numeric_limits<double>::infinity();
        q.max_aspect_ratio = std::max(q.max_aspect_ratio, aspect);
    }
    return q;
}

bool is_conforming(const TriangleMesh& m) {
    std::set<std::size_t> side;
    for (const auto& [l, r] : m.periodic_pairs) {
        side.insert(l);
        side.insert(r);
    }
    for (const auto& [edge, count] : edge_incidence(m)) {
        if (count > 2) return false;
        if (count == 1) {
            const auto on_boundary = [&](std::size_t v) {
                return m.markers[v] != BoundaryMarker::Interior || side.count(v) > 0;
            };
            if (!on_boundary(edge.first) || !on_boundary(edge.second)) return false;
        }
    }
    return true;
}

void check_orientation(const TriangleMesh& m) {
    std::size_t worst = 0;
    double worst_area = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const double a = m.signed_area(t);
        if (a < worst_area) {
            worst_area = a;
            worst = t;
        }
    }
    if (m.triangle_count() > 0 && !(worst_area > 0.0)) {
        std::ostringstream msg;
        msg << "inverted or degenerate triangle " << worst << " (signed area " << worst_area
            << "); raise the mesh resolution";
        throw MeshQualityError(worst, worst_area, msg.str());
    }
}

TriangleMesh mesh_eddy(const DomainSpec& d, int n_radial, int n_angular) {
    if (d.kind != DomainKind::Eddy) throw ParameterError("domain", "mesh_eddy needs an eddy domain");
    if (n_radial < 2) throw ParameterError("n_radial", "n_radial must be at least 2");
    if (n_angular < 8 || n_angular % 2 != 0) {
        throw ParameterError("n_angular", "n_angular must be even and at least 8");
    }
    const double x_mid = 0.5 * (d.x_left + d.x_right);
    const double half = 0.5 * (d.x_right - d.x_left);
    const std::size_t na = static_cast<std::size_t>(n_angular);
    const std::size_t nr = static_cast<std::size_t>(n_radial);
    const PhasePoint c = d.center;

    // Boundary ring.
    std::vector<PhasePoint> ring(na);
    std::vector<BoundaryMarker> ring_marker(na);
    const PhasePoint right_tip = d.segments.front().curve.points.back();
    const PhasePoint left_tip = d.segments.front().curve.points.front();
    for (std::size_t i = 0; i < na; ++i) {
        if (i == 0) {
            ring[i] = right_tip;
            ring_marker[i] = BoundaryMarker::Corner;
            continue;
        }
        if (i == na / 2) {
            ring[i] = left_tip;
            ring_marker[i] = BoundaryMarker::Corner;
            continue;
        }
        const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(na);
        const double x = x_mid + half * std::cos(theta);
        const BoundaryMarker mk = i < na / 2 ? BoundaryMarker::GammaUpper : BoundaryMarker::GammaLower;
        const auto y = d.boundary_y(mk, x);
        if (!y) throw GeometryError("eddy boundary does not cover the blending abscissa");
        ring[i] = {x, *y};
        ring_marker[i] = mk;
    }

    TriangleMesh m;
    m.vertices.reserve(1 + nr * na);
    m.vertices.push_back(c);
    m.markers.push_back(BoundaryMarker::Interior);
    for (std::size_t j = 1; j <= nr; ++j) {
        const double r = static_cast<double>(j) / static_cast<double>(nr);
        for (std::size_t i = 0; i < na; ++i) {
            if (j == nr) {
                m.vertices.push_back(ring[i]);
                m.markers.push_back(ring_marker[i]);
            } else {
                m.vertices.push_back(c + r * (ring[i] - c));
                m.markers.push_back(BoundaryMarker::Interior);
            }
        }
    }
    auto vid = [na](std::size_t j, std::size_t i) { return 1 + (j - 1) * na + (i % na); };
    for (std::size_t i = 0; i < na; ++i) m.triangles.push_back({0, vid(1, i), vid(1, i + 1)});
    for (std::size_t j = 1; j < nr; ++j) {
        for (std::size_t i = 0; i < na; ++i) {
            add_quad(m, vid(j, i), vid(j + 1, i), vid(j + 1, i + 1), vid(j, i + 1));
        }
    }
    m.h_max = longest_edge(m);
    m.domain = std::make_shared<const DomainSpec>(d);
    check_orientation(m);
    return m;
}

TriangleMesh mesh_jet_core(const DomainSpec& d, int n_x, int n_y) {
    if (d.kind != DomainKind::JetCoreUnit) {
        throw ParameterError("domain", "mesh_jet_core needs a jet-core domain");
    }
    if (n_x < 8) throw ParameterError("n_x", "n_x must be at least 8");
    if (n_y < 4) throw ParameterError("n_y", "n_y must be at least 4");
    const std::size_t nx = static_cast<std::size_t>(n_x);
    const std::size_t ny = static_cast<std::size_t>(n_y);
    TriangleMesh m;
    m.vertices.resize((nx + 1) * (ny + 1));
    m.markers.resize(m.vertices.size(), BoundaryMarker::Interior);
    auto vid = [ny](std::size_t i, std::size_t j) { return i * (ny + 1) + j; };
    for (std::size_t i = 0; i <= nx; ++i) {
        const double x = i == nx ? d.x_right
                                 : d.x_left + (d.x_right - d.x_left) * static_cast<double>(i) /
                                                  static_cast<double>(nx);
        const auto lo = d.boundary_y(BoundaryMarker::GammaLower, x);
        const auto up = d.boundary_y(BoundaryMarker::GammaUpper, x);
        if (!lo || !up) throw GeometryError("jet-core boundary does not cover the mesh column");
        for (std::size_t j = 0; j <= ny; ++j) {
            const double s = static_cast<double>(j) / static_cast<double>(ny);
            double y = j == 0 ? *lo : (j == ny ? *up : *lo + s * (*up - *lo));
            if (i == nx) y = m.vertices[vid(0, j)].y;  // exact periodic image
            m.vertices[vid(i, j)] = {x, y};
        }
        m.markers[vid(i, 0)] = BoundaryMarker::GammaLower;
        m.markers[vid(i, ny)] = BoundaryMarker::GammaUpper;
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            add_quad(m, vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
        }
    }
    for (std::size_t j = 0; j <= ny; ++j) m.periodic_pairs.emplace_back(vid(0, j), vid(nx, j));
    m.h_max = longest_edge(m);
    m.domain = std::make_shared<const DomainSpec>(d);
    check_orientation(m);
    return m;
}

TriangleMesh refine_uniform(const TriangleMesh& m) {
    const auto incidence = edge_incidence(m);
    std::set<std::size_t> left, right;
    std::map<std::size_t, std::size_t> partner;
    for (const auto& [l, r] : m.periodic_pairs) {
        left.insert(l);
        right.insert(r);
        partner[l] = r;
    }
    TriangleMesh out;
    out.vertices = m.vertices;
    out.markers = m.markers;
    out.periodic_pairs = m.periodic_pairs;
    out.domain = m.domain;

    std::map<Edge, std::size_t> midpoint;
    for (const auto& [edge, count] : incidence) {
        const auto [a, b] = edge;
        PhasePoint mid = 0.5 * (m.vertices[a] + m.vertices[b]);
        BoundaryMarker mk = BoundaryMarker::Interior;
        const bool side = (left.count(a) && left.count(b)) || (right.count(a) && right.count(b));
        if (count == 1 && !side) {
            const BoundaryMarker ma = m.markers[a];
            const BoundaryMarker mb = m.markers[b];
            if (ma == BoundaryMarker::GammaUpper || mb == BoundaryMarker::GammaUpper) {
                mk = BoundaryMarker::GammaUpper;
            } else if (ma == BoundaryMarker::GammaLower || mb == BoundaryMarker::GammaLower) {
                mk = BoundaryMarker::GammaLower;
            }
            if (mk != BoundaryMarker::Interior && m.domain) {
                // Vertical projection stalls at the eddy tips, where the
                // boundary is vertical; project to the closest point there.
                if (m.domain->kind == DomainKind::Eddy) {
                    if (const auto c = closest_on_boundary(*m.domain, mk, mid)) mid = *c;
                } else if (const auto y = m.domain->boundary_y(mk, mid.x)) {
                    mid.y = *y;
                }
            }
        }
        midpoint[edge] = out.vertices.size();
        out.vertices.push_back(mid);
        out.markers.push_back(mk);
    }
    // Midpoints of paired side edges become new periodic pairs.
    for (const auto& [edge, count] : incidence) {
        const auto [a, b] = edge;
        if (!(left.count(a) && left.count(b))) continue;
        const auto it = midpoint.find(make_edge(partner[a], partner[b]));
        if (it == midpoint.end()) throw PairingError("periodic side edges do not match");
        const std::size_t lm = midpoint[edge];
        out.vertices[it->second].y = out.vertices[lm].y;
        out.periodic_pairs.emplace_back(lm, it->second);
    }
    out.triangles.reserve(4 * m.triangle_count());
    for (const Triangle& t : m.triangles) {
        const std::size_t ab = midpoint[make_edge(t[0], t[1])];
        const std::size_t bc = midpoint[make_edge(t[1], t[2])];
        const std::size_t ca = midpoint[make_edge(t[2], t[0])];
        out.triangles.push_back({t[0], ab, ca});
        out.triangles.push_back({ab, t[1], bc});
        out.triangles.push_back({ca, bc, t[2]});
        out.triangles.push_back({ab, bc, ca});
    }
    out.h_max = longest_edge(out);
    check_orientation(out);
    return out;
}

void smooth_laplacian(TriangleMesh& m, int sweeps) {
    std::vector<char> fixed(m.vertex_count(), 0);
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        fixed[v] = m.markers[v] != BoundaryMarker::Interior;
    }
    for (const auto& [l, r] : m.periodic_pairs) fixed[l] = fixed[r] = 1;
    std::vector<std::set<std::size_t>> nbr(m.vertex_count());
    for (const Triangle& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            nbr[t[e]].insert(t[(e + 1) % 3]);
            nbr[t[(e + 1) % 3]].insert(t[e]);
        }
    }
    for (int s = 0; s < sweeps; ++s) {
        std::vector<PhasePoint> next = m.vertices;
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            if (fixed[v] || nbr[v].empty()) continue;
            PhasePoint sum;
            for (std::size_t w : nbr[v]) sum = sum + m.vertices[w];
            next[v] = (1.0 / static_cast<double>(nbr[v].size())) * sum;
        }
        m.vertices = std::move(next);
    }
    m.h_max = longest_edge(m);
    check_orientation(m);
}

}  // namespace jetexit
