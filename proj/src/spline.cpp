#include "jetexit/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

// Thomas algorithm; sub[0] and sup[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                      std::vector<double> sup, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

// Cyclic tridiagonal system: corner entries sub[0] (row 0, col n-1) and
// sup[n-1] (row n-1, col 0). Sherman-Morrison on top of Thomas.
std::vector<double> solve_cyclic(const std::vector<double>& sub, const std::vector<double>& diag,
                                 const std::vector<double>& sup, const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    const double alpha = sup[n - 1];
    const double beta = sub[0];
    const double gamma = -diag[0];
    std::vector<double> d = diag;
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    std::vector<double> x = solve_tridiagonal(sub, d, sup, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> z = solve_tridiagonal(sub, d, sup, u);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

constexpr std::array<double, 3> kGauss3Nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGauss3Weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
constexpr std::array<double, 5> kGauss5Nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                             0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGauss5Weights{0.2369268850561891, 0.4786286704993665,
                                               0.5688888888888889, 0.4786286704993665,
                                               0.2369268850561891};

}  // namespace

std::vector<CubicSpline2::Cubic> CubicSpline2::build(std::span<const double> values,
                                                     std::span<const double> knots, bool closed) {
    // `values` has one entry per knot; for closed curves the last equals the first.
    const std::size_t segs = knots.size() - 1;
    std::vector<double> h(segs);
    for (std::size_t i = 0; i < segs; ++i) h[i] = knots[i + 1] - knots[i];

    std::vector<double> m(segs + 1, 0.0);
    if (closed) {
        const std::size_t n = segs;
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double hp = h[(i + n - 1) % n];
            const double hn = h[i];
            const double vp = values[(i + n - 1) % n];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hn);
            sup[i] = hn;
            rhs[i] = 6.0 * ((values[i + 1] - values[i]) / hn - (values[i] - vp) / hp);
        }
        const std::vector<double> sol = solve_cyclic(sub, diag, sup, rhs);
        for (std::size_t i = 0; i < n; ++i) m[i] = sol[i];
        m[n] = m[0];
    } else if (segs >= 2) {
        const std::size_t n = segs - 1;  // interior knots
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = j + 1;
            sub[j] = h[i - 1];
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            sup[j] = h[i];
            rhs[j] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        const std::vector<double> sol = solve_tridiagonal(sub, diag, sup, rhs);
        for (std::size_t j = 0; j < n; ++j) m[j + 1] = sol[j];
    }

    std::vector<Cubic> out(segs);
    for (std::size_t i = 0; i < segs; ++i) {
        Cubic& cu = out[i];
        cu.a = values[i];
        cu.b = (values[i + 1] - values[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
        cu.c = 0.5 * m[i];
        cu.d = (m[i + 1] - m[i]) / (6.0 * h[i]);
    }
    return out;
}

CubicSpline2 CubicSpline2::fit(std::span<const PhasePoint> points, bool closed) {
    if (points.size() < 4) throw DegenerateInputError("cubic spline needs at least 4 points");
    const std::size_t n = points.size();
    const std::size_t knot_count = closed ? n + 1 : n;
    CubicSpline2 s;
    s.closed_ = closed;
    s.points_.assign(points.begin(), points.end());
    s.knots_.resize(knot_count);
    s.knots_[0] = 0.0;
    for (std::size_t i = 1; i < knot_count; ++i) {
        const double d = distance(points[i % n], points[i - 1]);
        if (d < 1e-12) throw DegenerateInputError("duplicate consecutive spline points");
        s.knots_[i] = s.knots_[i - 1] + d;
    }
    std::vector<double> xs(knot_count), ys(knot_count);
    for (std::size_t i = 0; i < knot_count; ++i) {
        xs[i] = points[i % n].x;
        ys[i] = points[i % n].y;
    }
    s.cx_ = build(xs, s.knots_, closed);
    s.cy_ = build(ys, s.knots_, closed);
    s.x_increasing_ = points.back().x >= points.front().x;
    return s;
}

std::size_t CubicSpline2::locate(double t, double& local) const {
    const std::size_t segs = segment_count();
    if (closed_) {
        const double len = knots_.back();
        t = std::fmod(t, len);
        if (t < 0.0) t += len;
    }
    if (t <= knots_.front()) {
        local = t - knots_.front();
        return 0;
    }
    if (t >= knots_.back()) {
        local = t - knots_[segs - 1];
        return segs - 1;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    local = t - knots_[i];
    return i;
}

PhasePoint CubicSpline2::eval(double t) const {
    if (!closed_ && t == knots_.back()) return points_.back();
    double s = 0.0;
    const std::size_t i = locate(t, s);
    return {cx_[i].value(s), cy_[i].value(s)};
}

PhasePoint CubicSpline2::derivative(double t) const {
    double s = 0.0;
    const std::size_t i = locate(t, s);
    return {cx_[i].slope(s), cy_[i].slope(s)};
}

PhasePoint CubicSpline2::second_derivative(double t) const {
    double s = 0.0;
    const std::size_t i = locate(t, s);
    return {cx_[i].curve(s), cy_[i].curve(s)};
}

double CubicSpline2::curvature(double t) const {
    const PhasePoint d1 = derivative(t);
    const PhasePoint d2 = second_derivative(t);
    const double sp = norm(d1);
    return cross(d1, d2) / (sp * sp * sp);
}

double CubicSpline2::arc_length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const double h = knots_[i + 1] - knots_[i];
        for (std::size_t q = 0; q < kGauss5Nodes.size(); ++q) {
            const double s = 0.5 * h * (kGauss5Nodes[q] + 1.0);
            total += 0.5 * h * kGauss5Weights[q] * std::hypot(cx_[i].slope(s), cy_[i].slope(s));
        }
    }
    return total;
}

double CubicSpline2::integral_x_dy() const {
    // Integrand x(s) y'(s) is a degree-5 polynomial: 3-point Gauss is exact.
    double total = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const double h = knots_[i + 1] - knots_[i];
        for (std::size_t q = 0; q < kGauss3Nodes.size(); ++q) {
            const double s = 0.5 * h * (kGauss3Nodes[q] + 1.0);
            total += 0.5 * h * kGauss3Weights[q] * cx_[i].value(s) * cy_[i].slope(s);
        }
    }
    return total;
}

double CubicSpline2::integral_y_dx() const {
    double total = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const double h = knots_[i + 1] - knots_[i];
        for (std::size_t q = 0; q < kGauss3Nodes.size(); ++q) {
            const double s = 0.5 * h * (kGauss3Nodes[q] + 1.0);
            total += 0.5 * h * kGauss3Weights[q] * cy_[i].value(s) * cx_[i].slope(s);
        }
    }
    return total;
}

double CubicSpline2::x_min() const {
    return x_increasing_ ? points_.front().x : points_.back().x;
}

double CubicSpline2::x_max() const {
    return x_increasing_ ? points_.back().x : points_.front().x;
}

std::optional<double> CubicSpline2::y_at_x(double x) const {
    if (closed_ || x < x_min() || x > x_max()) return std::nullopt;
    if (x == points_.front().x) return points_.front().y;
    if (x == points_.back().x) return points_.back().y;
    // Segment whose knot abscissae bracket x.
    const std::size_t n = points_.size();
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool right = x_increasing_ ? points_[mid].x <= x : points_[mid].x >= x;
        (right ? lo : hi) = mid;
    }
    const Cubic& cx = cx_[lo];
    const Cubic& cy = cy_[lo];
    double s0 = 0.0;
    double s1 = knots_[lo + 1] - knots_[lo];
    double f0 = cx.value(s0) - x;
    if (f0 == 0.0) return cy.value(s0);
    // Safeguarded Newton on the bracket [s0, s1].
    double s = s1 * (x - points_[lo].x) / (points_[lo + 1].x - points_[lo].x);
    for (int it = 0; it < 60; ++it) {
        const double f = cx.value(s) - x;
        if (std::abs(f) < 1e-15 * std::max(1.0, std::abs(x))) break;
        if ((f < 0.0) == (f0 < 0.0)) {
            s0 = s;
            f0 = f;
        } else {
            s1 = s;
        }
        const double df = cx.slope(s);
        double next = df != 0.0 ? s - f / df : 0.5 * (s0 + s1);
        if (!(next > s0 && next < s1)) next = 0.5 * (s0 + s1);
        if (std::abs(next - s) < 1e-16) {
            s = next;
            break;
        }
        s = next;
    }
    return cy.value(s);
}

}  // namespace jetexit
