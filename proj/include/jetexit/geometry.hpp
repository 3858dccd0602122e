#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jetexit/flowfield.hpp"
#include "jetexit/spline.hpp"

namespace jetexit {

enum class StagnationKind { Saddle, Center };

struct StagnationPoint {
    PhasePoint location;
    double stream_value = 0.0;
    StagnationKind classification = StagnationKind::Saddle;
};

struct Rectangle {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(PhasePoint p, double slack = 0.0) const {
        return p.x >= x_min - slack && p.x <= x_max + slack && p.y >= y_min - slack &&
               p.y <= y_max + slack;
    }
};

/// [0, 2 pi / k] x [-2, 2].
Rectangle default_stagnation_window(const JetParameters& p);

/// All zeros of the drift inside `window`, polished by Newton iteration from a
/// seeds_x x seeds_y grid of seeds, deduplicated at 1e-6 and sorted by (x, y).
/// A saddle has det(J) < 0. Throws DegeneratePointError when a converged root
/// has a singular Jacobian.
std::vector<StagnationPoint> find_stagnation_points(const JetParameters& p, const Rectangle& window,
                                                    int seeds_x = 16, int seeds_y = 32);

/// A traced level set of the stream function with its spline fit.
struct SeparatrixCurve {
    std::vector<PhasePoint> points;
    CubicSpline2 spline;
    double level = 0.0;
};

enum class TraceEnd {
    Closed,     ///< returned within step/2 of the start
    LeftBox,    ///< left the bounding box
    SaddleHit,  ///< |grad| < 1e-10 at the current point
    StopPoint,  ///< reached one of the configured stop points
};

struct TraceOptions {
    double step = 1e-3;
    double corrector_tolerance = 1e-10;
    std::size_t max_points = 200000;
    Rectangle bounding_box{-1e3, 1e3, -1e3, 1e3};
    /// Points that terminate the trace when reached (appended exactly).
    std::vector<PhasePoint> stop_points;
    /// Initial marching direction; defaults to the flow direction at the seed.
    std::optional<PhasePoint> initial_direction;
};

struct TraceResult {
    SeparatrixCurve curve;
    TraceEnd end = TraceEnd::LeftBox;
};

/// Projects `seed` onto {f = level} by Newton along grad f, then marches with
/// an RK2 tangent predictor and a Newton-projection corrector. Throws
/// TracingBudgetError when max_points is exceeded and GeometryError when the
/// seed cannot be projected. Fits a spline when at least 4 points were traced.
TraceResult trace_level_set(const PlaneFunction& f, double level, PhasePoint seed,
                            const TraceOptions& options = {});

TraceResult trace_level_set(const JetParameters& p, double level, PhasePoint seed,
                            double step = 1e-3);

enum class DomainKind { Eddy, JetCoreUnit };
enum class JetPhase { Trough, Crest };

/// Boundary labels. Corner marks the two points where Gamma_upper and
/// Gamma_lower of an eddy meet.
enum class BoundaryMarker : std::uint8_t { Interior, GammaUpper, GammaLower, Corner };

std::string to_string(DomainKind kind);
std::string to_string(JetPhase phase);
std::string to_string(BoundaryMarker marker);

struct BoundarySegment {
    BoundaryMarker marker = BoundaryMarker::GammaUpper;
    SeparatrixCurve curve;  ///< x strictly increasing along the points
};

/// An eddy or a unit jet core bounded by spline segments that are graphs over
/// x. Gamma_upper segments lie above Gamma_lower segments. For a jet core the
/// vertical cuts x = x_left and x = x_right are periodic images.
struct DomainSpec {
    DomainKind kind = DomainKind::Eddy;
    double beta = 0.0;
    JetPhase phase = JetPhase::Trough;
    std::vector<BoundarySegment> segments;
    double area = 0.0;
    /// Eddy: the center stagnation point used as the mesh blending pole.
    PhasePoint center;
    double x_left = 0.0;
    double x_right = 0.0;
    std::vector<std::string> warnings;

    double period() const { return x_right - x_left; }

    /// y of the chain carrying `marker` (GammaUpper or GammaLower) at x.
    std::optional<double> boundary_y(BoundaryMarker marker, double x) const;
    /// Wraps x into [x_left, x_right) for a jet core; identity for an eddy.
    double wrap_x(double x) const;
    /// min(upper(x) - y, y - lower(x)); negative outside. For an eddy, points
    /// with x beyond the tips get minus their distance to the nearest tip.
    double signed_gap(PhasePoint pt) const;
    bool contains(PhasePoint pt) const { return signed_gap(pt) > 0.0; }
    /// Closed boundary polygon (counterclockwise) from the segment points.
    std::vector<PhasePoint> outline() const;
};

/// Area from the exact Green's-theorem integral over the boundary splines.
double spline_area(const DomainSpec& d);

/// Southern-row eddy centered on x = 0, split at its saddles x = -pi/k, pi/k.
/// Gamma_upper borders the jet core, Gamma_lower the exterior retrograde region.
DomainSpec build_eddy_domain(const JetParameters& p, double step = 1e-3);

/// One period of the jet core between the northern and southern separatrix
/// chains; trough phase spans [0, 2 pi / k], crest phase [-pi / k, pi / k].
DomainSpec build_jet_core_domain(const JetParameters& p, JetPhase phase = JetPhase::Trough,
                                 double step = 1e-3);

/// Fits the parametric spline; thin wrapper kept for the public surface.
CubicSpline2 fit_cubic_spline(std::span<const PhasePoint> points, bool closed);

// Synthetic domains for analytic and calibration tests.

/// Eddy-kind ellipse with semi-axes (semi_x, semi_y); arcs sampled at
/// x = cx + semi_x cos(theta_j), theta_j = pi j / half_samples.
DomainSpec make_ellipse_domain(PhasePoint center, double semi_x, double semi_y,
                               int half_samples = 64);
DomainSpec make_disk_domain(PhasePoint center, double radius, int half_samples = 64);
/// JetCoreUnit-kind rectangle [x_left, x_right] x [y_lower, y_upper].
DomainSpec make_strip_domain(double x_left, double x_right, double y_lower, double y_upper,
                             int samples = 32);

}  // namespace jetexit
