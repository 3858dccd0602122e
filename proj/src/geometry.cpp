#include "jetexit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

constexpr double kPi = std::numbers::pi;

std::string beta_tag(double beta) {
    std::ostringstream s;
    s << " (beta = " << beta << ")";
    return s.str();
}

// Newton projection along grad f onto {f = level}.
bool project_to_level(const PlaneFunction& f, double level, PhasePoint& x, double tol) {
    for (int it = 0; it < 60; ++it) {
        const double r = f.value(x) - level;
        if (std::abs(r) < tol) return true;
        const PhasePoint g = f.gradient(x);
        const double gg = dot(g, g);
        if (gg < 1e-30) return false;
        x = x - (r / gg) * g;
    }
    return std::abs(f.value(x) - level) < tol;
}

PhasePoint unit_tangent(const PlaneFunction& f, PhasePoint x, PhasePoint previous) {
    const PhasePoint g = f.gradient(x);
    PhasePoint t{-g.y, g.x};
    const double n = norm(t);
    t = (1.0 / n) * t;
    if (dot(t, previous) < 0.0) t = -1.0 * t;
    return t;
}

// Solves psi(x, y) = level for y by Newton from y0 at fixed x.
double solve_level_y(const JetParameters& p, double level, double x, double y0) {
    double y = y0;
    for (int it = 0; it < 60; ++it) {
        const double r = stream_function(p, {x, y}) - level;
        const double dpsi_dy = -velocity(p, {x, y}).u;
        if (dpsi_dy == 0.0) break;
        const double dy = r / dpsi_dy;
        y -= dy;
        if (std::abs(dy) < 1e-15) break;
    }
    return y;
}

// Polishes an on-axis stagnation point: at x = m pi / k, v = 0 and u(x, y) = 0
// is solved in y alone.
PhasePoint polish_on_axis(const JetParameters& p, double x, double y0) {
    double y = y0;
    for (int it = 0; it < 60; ++it) {
        const double u = velocity(p, {x, y}).u;
        const double du = velocity_jacobian(p, {x, y}).du_dy;
        if (du == 0.0) break;
        const double dy = u / du;
        y -= dy;
        if (std::abs(dy) < 1e-15) break;
    }
    return {x, y};
}

struct ChainSaddles {
    PhasePoint south;   // southern saddle, on x = pi / k
    PhasePoint north;   // northern saddle, on x = 0
    PhasePoint south_center;  // on x = 0
};

ChainSaddles locate_saddles(const JetParameters& p) {
    const double period = p.period();
    Rectangle window{-0.25 * period, 1.25 * period, -2.5, 2.5};
    const auto points = find_stagnation_points(p, window, 20, 40);
    std::optional<PhasePoint> south, north, center;
    for (const auto& sp : points) {
        const PhasePoint l = sp.location;
        const bool on_half = std::abs(l.x - 0.5 * period) < 1e-6;
        const bool on_zero = std::abs(l.x) < 1e-6;
        if (sp.classification == StagnationKind::Saddle && l.y < 0.0 && on_half) south = l;
        if (sp.classification == StagnationKind::Saddle && l.y > 0.0 && on_zero) north = l;
        if (sp.classification == StagnationKind::Center && l.y < 0.0 && on_zero) center = l;
    }
    if (!south || !north || !center) {
        throw GeometryError("saddle detection failed: expected southern saddle at x = pi/k, "
                            "northern saddle and southern center at x = 0" +
                            beta_tag(p.beta()));
    }
    ChainSaddles s;
    s.south = polish_on_axis(p, 0.5 * period, south->y);
    s.north = polish_on_axis(p, 0.0, north->y);
    s.south_center = polish_on_axis(p, 0.0, center->y);
    return s;
}

// Slopes dy/dx of the two separatrix branches through a saddle: roots of
// psi_xx + 2 psi_xy m + psi_yy m^2 = 0, returned as (smaller, larger).
std::pair<double, double> separatrix_slopes(const JetParameters& p, PhasePoint saddle) {
    const Hessian2 h = jet_stream_function(p).hessian(saddle);
    const double disc = h.xy * h.xy - h.xx * h.yy;
    if (disc <= 0.0 || h.yy == 0.0) {
        throw GeometryError("point is not a saddle of the stream function" + beta_tag(p.beta()));
    }
    const double r = std::sqrt(disc);
    const double m1 = (-h.xy - r) / h.yy;
    const double m2 = (-h.xy + r) / h.yy;
    return {std::min(m1, m2), std::max(m1, m2)};
}

// Traces the branch leaving `from` with slope `slope` (rightwards) until it
// reaches `to`. Returns the points from `from` to `to`, both exact.
std::vector<PhasePoint> trace_arc(const JetParameters& p, double level, PhasePoint from,
                                  PhasePoint to, double slope, double step) {
    const PhasePoint dir = (1.0 / std::hypot(1.0, slope)) * PhasePoint{1.0, slope};
    TraceOptions opt;
    opt.step = step;
    opt.stop_points = {to};
    opt.initial_direction = dir;
    opt.bounding_box = {from.x - 1.0, to.x + 1.0, std::min(from.y, to.y) - 3.0,
                        std::max(from.y, to.y) + 3.0};
    opt.max_points = static_cast<std::size_t>(50.0 * (to.x - from.x + 1.0) / step) + 1000;
    TraceResult r = trace_level_set(jet_stream_function(p), level, from + step * dir, opt);
    if (r.end != TraceEnd::StopPoint) {
        throw GeometryError("separatrix arc did not reach the neighbouring saddle" +
                            beta_tag(p.beta()));
    }
    std::vector<PhasePoint> pts;
    pts.reserve(r.curve.points.size() + 1);
    pts.push_back(from);
    for (const PhasePoint& q : r.curve.points) {
        if (distance(q, pts.back()) > 0.25 * step) pts.push_back(q);
    }
    pts.back() = to;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!(pts[i].x > pts[i - 1].x)) {
            throw GeometryError("separatrix arc is not a graph over x" + beta_tag(p.beta()));
        }
    }
    return pts;
}

// Pieces of the periodic chain generated by `arc` (one period, saddle to
// saddle) over [xl, xr]; cut points off the arc ends are placed on the level
// set by a 1-D Newton solve.
std::vector<std::vector<PhasePoint>> clip_chain(const JetParameters& p, double level,
                                                const std::vector<PhasePoint>& arc, double xl,
                                                double xr, double step) {
    const double period = p.period();
    const double snap = 1e-9;
    std::vector<std::vector<PhasePoint>> pieces;
    for (int n = -2; n <= 2; ++n) {
        const double shift = n * period;
        const double a = arc.front().x + shift;
        const double b = arc.back().x + shift;
        if (b <= xl + step || a >= xr - step) continue;
        std::vector<PhasePoint> piece;
        auto cut_point = [&](double xc, std::size_t i) {
            // arc[i-1].x + shift < xc < arc[i].x + shift
            const PhasePoint l = arc[i - 1];
            const PhasePoint r = arc[i];
            const double w = (xc - shift - l.x) / (r.x - l.x);
            return PhasePoint{xc, solve_level_y(p, level, xc, l.y + w * (r.y - l.y))};
        };
        for (std::size_t i = 0; i < arc.size(); ++i) {
            PhasePoint q{arc[i].x + shift, arc[i].y};
            if (std::abs(q.x - xl) < snap) q.x = xl;
            if (std::abs(q.x - xr) < snap) q.x = xr;
            if (q.x < xl || q.x > xr) {
                if (q.x > xr && i > 0 && arc[i - 1].x + shift < xr) {
                    const PhasePoint c = cut_point(xr, i);
                    if (!piece.empty() && distance(piece.back(), c) < 0.25 * step) piece.pop_back();
                    piece.push_back(c);
                }
                continue;
            }
            if (piece.empty() && q.x > xl && i > 0) {
                piece.push_back(cut_point(xl, i));
                if (distance(piece.back(), q) < 0.25 * step) continue;
            }
            piece.push_back(q);
        }
        if (piece.size() >= 4) pieces.push_back(std::move(piece));
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& u, const auto& v) { return u.front().x < v.front().x; });
    return pieces;
}

SeparatrixCurve make_curve(std::vector<PhasePoint> pts, double level) {
    SeparatrixCurve c;
    c.spline = CubicSpline2::fit(pts, false);
    c.points = std::move(pts);
    c.level = level;
    return c;
}

}  // namespace

Rectangle default_stagnation_window(const JetParameters& p) {
    return {0.0, p.period(), -2.0, 2.0};
}

std::vector<StagnationPoint> find_stagnation_points(const JetParameters& p, const Rectangle& window,
                                                    int seeds_x, int seeds_y) {
    if (!(window.x_max > window.x_min && window.y_max > window.y_min)) {
        throw ParameterError("window", "stagnation window must have positive area");
    }
    const double margin = 1e-9 * (1.0 + std::abs(window.x_max) + std::abs(window.y_max));
    const double dx = (window.x_max - window.x_min) / seeds_x;
    const double dy = (window.y_max - window.y_min) / seeds_y;
    std::vector<StagnationPoint> found;
    for (int i = 0; i < seeds_x; ++i) {
        for (int j = 0; j < seeds_y; ++j) {
            PhasePoint x{window.x_min + (i + 0.5) * dx, window.y_min + (j + 0.5) * dy};
            bool converged = false;
            for (int it = 0; it < 50; ++it) {
                const VelocityVector w = velocity(p, x);
                if (speed(w) < 1e-13) {
                    converged = true;
                    break;
                }
                const Jacobian2 jac = velocity_jacobian(p, x);
                const double det = jac.det();
                if (std::abs(det) < 1e-300) break;
                const PhasePoint step{(-jac.dv_dy * w.u + jac.du_dy * w.v) / det,
                                      (jac.dv_dx * w.u - jac.du_dx * w.v) / det};
                x = x + step;
                if (!window.contains(x, 0.5 * (dx + dy))) break;
            }
            if (!converged || !window.contains(x, margin)) continue;
            const Jacobian2 jac = velocity_jacobian(p, x);
            if (std::abs(jac.det()) < 1e-12) {
                std::ostringstream msg;
                msg << "singular velocity Jacobian at stagnation point (" << x.x << ", " << x.y
                    << ")" << beta_tag(p.beta());
                throw DegeneratePointError(x.x, x.y, msg.str());
            }
            const bool duplicate = std::any_of(found.begin(), found.end(), [&](const auto& s) {
                return distance(s.location, x) < 1e-6;
            });
            if (duplicate) continue;
            found.push_back({x, stream_function(p, x),
                             jac.det() < 0.0 ? StagnationKind::Saddle : StagnationKind::Center});
        }
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.location.x != b.location.x ? a.location.x < b.location.x
                                            : a.location.y < b.location.y;
    });
    return found;
}

TraceResult trace_level_set(const PlaneFunction& f, double level, PhasePoint seed,
                            const TraceOptions& options) {
    const double h = options.step;
    PhasePoint x = seed;
    if (!project_to_level(f, level, x, options.corrector_tolerance)) {
        throw GeometryError("seed could not be projected onto the level set");
    }
    TraceResult result;
    std::vector<PhasePoint>& pts = result.curve.points;
    result.curve.level = level;
    pts.push_back(x);
    const PhasePoint start = x;

    PhasePoint dir;
    if (options.initial_direction) {
        dir = *options.initial_direction;
    } else {
        const PhasePoint g = f.gradient(x);
        dir = {-g.y, g.x};
    }

    for (;;) {
        if (pts.size() > options.max_points) {
            throw TracingBudgetError("level-set trace exceeded the point budget");
        }
        bool stopped = false;
        for (const PhasePoint& s : options.stop_points) {
            const double d = distance(x, s);
            if (d <= 1.5 * h) {
                if (d < 0.25 * h && pts.size() > 1) {
                    pts.back() = s;
                } else {
                    pts.push_back(s);
                }
                result.end = TraceEnd::StopPoint;
                stopped = true;
                break;
            }
        }
        if (stopped) break;
        if (norm(f.gradient(x)) < 1e-10) {
            result.end = TraceEnd::SaddleHit;
            break;
        }
        const PhasePoint t1 = unit_tangent(f, x, dir);
        const PhasePoint t2 = unit_tangent(f, x + (0.5 * h) * t1, t1);
        PhasePoint next = x + h * t2;
        if (!project_to_level(f, level, next, options.corrector_tolerance)) {
            throw GeometryError("corrector failed to return to the level set");
        }
        if (!options.bounding_box.contains(next)) {
            result.end = TraceEnd::LeftBox;
            break;
        }
        if (pts.size() > 10) {
            // closest approach of segment [x, next] to the start
            const PhasePoint seg = next - x;
            const double w = std::clamp(dot(start - x, seg) / dot(seg, seg), 0.0, 1.0);
            if (distance(x + w * seg, start) < 0.5 * h) {
                result.end = TraceEnd::Closed;
                break;
            }
        }
        dir = next - x;
        x = next;
        pts.push_back(x);
    }
    if (pts.size() >= 4) {
        result.curve.spline = CubicSpline2::fit(pts, result.end == TraceEnd::Closed);
    }
    return result;
}

TraceResult trace_level_set(const JetParameters& p, double level, PhasePoint seed, double step) {
    TraceOptions opt;
    opt.step = step;
    opt.bounding_box = {seed.x - 4.0 * p.period(), seed.x + 4.0 * p.period(), -6.0, 6.0};
    return trace_level_set(jet_stream_function(p), level, seed, opt);
}

std::string to_string(DomainKind kind) {
    return kind == DomainKind::Eddy ? "eddy" : "jet-core";
}

std::string to_string(JetPhase phase) {
    return phase == JetPhase::Trough ? "trough" : "crest";
}

std::string to_string(BoundaryMarker marker) {
    switch (marker) {
        case BoundaryMarker::Interior: return "interior";
        case BoundaryMarker::GammaUpper: return "gamma_upper";
        case BoundaryMarker::GammaLower: return "gamma_lower";
        case BoundaryMarker::Corner: return "corner";
    }
    return "unknown";
}

std::optional<double> DomainSpec::boundary_y(BoundaryMarker marker, double x) const {
    for (const BoundarySegment& s : segments) {
        if (s.marker != marker) continue;
        if (x >= s.curve.spline.x_min() && x <= s.curve.spline.x_max()) {
            return s.curve.spline.y_at_x(x);
        }
    }
    return std::nullopt;
}

double DomainSpec::wrap_x(double x) const {
    if (kind == DomainKind::Eddy) return x;
    const double p = period();
    double w = std::fmod(x - x_left, p);
    if (w < 0.0) w += p;
    return x_left + w;
}

double DomainSpec::signed_gap(PhasePoint pt) const {
    const double x = wrap_x(pt.x);
    if (x < x_left) return -(x_left - x);
    if (x > x_right) return -(x - x_right);
    const auto up = boundary_y(BoundaryMarker::GammaUpper, x);
    const auto lo = boundary_y(BoundaryMarker::GammaLower, x);
    if (!up || !lo) return -1.0;
    return std::min(*up - pt.y, pt.y - *lo);
}

std::vector<PhasePoint> DomainSpec::outline() const {
    std::vector<const BoundarySegment*> lower, upper;
    for (const auto& s : segments) {
        (s.marker == BoundaryMarker::GammaUpper ? upper : lower).push_back(&s);
    }
    auto by_x = [](const BoundarySegment* a, const BoundarySegment* b) {
        return a->curve.points.front().x < b->curve.points.front().x;
    };
    std::sort(lower.begin(), lower.end(), by_x);
    std::sort(upper.begin(), upper.end(), by_x);
    std::vector<PhasePoint> poly;
    auto add = [&poly](PhasePoint q) {
        if (poly.empty() || distance(poly.back(), q) > 0.0) poly.push_back(q);
    };
    for (const auto* s : lower) {
        for (const PhasePoint& q : s->curve.points) add(q);
    }
    for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
        const auto& pts = (*it)->curve.points;
        for (auto q = pts.rbegin(); q != pts.rend(); ++q) add(*q);
    }
    if (poly.size() > 1 && distance(poly.front(), poly.back()) == 0.0) poly.pop_back();
    return poly;
}

double spline_area(const DomainSpec& d) {
    double area = 0.0;
    for (const auto& s : d.segments) {
        const double iy = s.curve.spline.integral_y_dx();
        area += s.marker == BoundaryMarker::GammaUpper ? iy : -iy;
    }
    return area;
}

CubicSpline2 fit_cubic_spline(std::span<const PhasePoint> points, bool closed) {
    return CubicSpline2::fit(points, closed);
}

DomainSpec build_eddy_domain(const JetParameters& p, double step) {
    const ChainSaddles s = locate_saddles(p);
    const double period = p.period();
    const PhasePoint right = s.south;
    const PhasePoint left{right.x - period, right.y};

    DomainSpec d;
    d.kind = DomainKind::Eddy;
    d.beta = p.beta();
    d.center = s.south_center;
    double level = stream_function(p, right);
    const double level_left = stream_function(p, left);
    if (std::abs(level - level_left) > 1e-9) {
        d.warnings.push_back("saddle levels differ by more than 1e-9; using their mean");
        level = 0.5 * (level + level_left);
    }
    const auto [m_low, m_high] = separatrix_slopes(p, left);
    d.segments.push_back({BoundaryMarker::GammaUpper,
                          make_curve(trace_arc(p, level, left, right, m_high, step), level)});
    d.segments.push_back({BoundaryMarker::GammaLower,
                          make_curve(trace_arc(p, level, left, right, m_low, step), level)});
    d.x_left = left.x;
    d.x_right = right.x;
    d.area = spline_area(d);
    if (!(d.area > 0.0)) throw GeometryError("eddy area is not positive" + beta_tag(p.beta()));
    return d;
}

DomainSpec build_jet_core_domain(const JetParameters& p, JetPhase phase, double step) {
    const ChainSaddles s = locate_saddles(p);
    const double period = p.period();

    // Southern chain: upper arc of the eddy centered on x = 0.
    const PhasePoint s_right = s.south;
    const PhasePoint s_left{s_right.x - period, s_right.y};
    const double south_level = stream_function(p, s_right);
    const auto south_slopes = separatrix_slopes(p, s_left);
    const auto south_arc = trace_arc(p, south_level, s_left, s_right, south_slopes.second, step);

    // Northern chain: lower arc of the eddy centered on x = pi / k.
    const PhasePoint n_left = s.north;
    const PhasePoint n_right{n_left.x + period, n_left.y};
    const double north_level = stream_function(p, n_left);
    const auto north_slopes = separatrix_slopes(p, n_left);
    const auto north_arc = trace_arc(p, north_level, n_left, n_right, north_slopes.first, step);

    DomainSpec d;
    d.kind = DomainKind::JetCoreUnit;
    d.beta = p.beta();
    d.phase = phase;
    d.x_left = phase == JetPhase::Trough ? 0.0 : -0.5 * period;
    d.x_right = d.x_left + period;
    for (auto& piece : clip_chain(p, north_level, north_arc, d.x_left, d.x_right, step)) {
        d.segments.push_back({BoundaryMarker::GammaUpper, make_curve(std::move(piece), north_level)});
    }
    for (auto& piece : clip_chain(p, south_level, south_arc, d.x_left, d.x_right, step)) {
        d.segments.push_back({BoundaryMarker::GammaLower, make_curve(std::move(piece), south_level)});
    }
    d.center = {0.5 * (d.x_left + d.x_right), 0.0};
    d.area = spline_area(d);
    if (!(d.area > 0.0)) throw GeometryError("jet-core area is not positive" + beta_tag(p.beta()));
    return d;
}

DomainSpec make_ellipse_domain(PhasePoint center, double semi_x, double semi_y, int half_samples) {
    const int n = half_samples;
    std::vector<PhasePoint> upper, lower;
    for (int i = n; i >= 0; --i) {
        const double t = kPi * i / n;
        upper.push_back({center.x + semi_x * std::cos(t), center.y + semi_y * std::sin(t)});
    }
    for (int i = n; i <= 2 * n; ++i) {
        const double t = kPi * i / n;
        lower.push_back({center.x + semi_x * std::cos(t), center.y + semi_y * std::sin(t)});
    }
    // sin(pi) and sin(2 pi) are not exactly zero in floating point.
    upper.front().y = upper.back().y = center.y;
    lower.front().y = lower.back().y = center.y;
    DomainSpec d;
    d.kind = DomainKind::Eddy;
    d.center = center;
    d.segments.push_back({BoundaryMarker::GammaUpper, make_curve(upper, 0.0)});
    d.segments.push_back({BoundaryMarker::GammaLower, make_curve(lower, 0.0)});
    d.x_left = upper.front().x;
    d.x_right = upper.back().x;
    d.area = spline_area(d);
    return d;
}

DomainSpec make_disk_domain(PhasePoint center, double radius, int half_samples) {
    return make_ellipse_domain(center, radius, radius, half_samples);
}

DomainSpec make_strip_domain(double x_left, double x_right, double y_lower, double y_upper,
                             int samples) {
    std::vector<PhasePoint> upper, lower;
    for (int i = 0; i <= samples; ++i) {
        const double x = i == samples ? x_right : x_left + (x_right - x_left) * i / samples;
        upper.push_back({x, y_upper});
        lower.push_back({x, y_lower});
    }
    DomainSpec d;
    d.kind = DomainKind::JetCoreUnit;
    d.x_left = x_left;
    d.x_right = x_right;
    d.center = {0.5 * (x_left + x_right), 0.5 * (y_lower + y_upper)};
    d.segments.push_back({BoundaryMarker::GammaUpper, make_curve(upper, 0.0)});
    d.segments.push_back({BoundaryMarker::GammaLower, make_curve(lower, 0.0)});
    d.area = spline_area(d);
    return d;
}

}  // namespace jetexit
