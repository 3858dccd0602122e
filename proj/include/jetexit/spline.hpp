#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "jetexit/flowfield.hpp"

namespace jetexit {

/// C2 interpolating parametric cubic through an ordered point list,
/// parameterized by cumulative chord length. Open splines use natural end
/// conditions; closed splines are periodic and add the segment from the last
/// point back to the first.
class CubicSpline2 {
public:
    CubicSpline2() = default;

    /// Throws DegenerateInputError for fewer than 4 points or for consecutive
    /// points closer than 1e-12.
    static CubicSpline2 fit(std::span<const PhasePoint> points, bool closed);

    bool closed() const { return closed_; }
    std::size_t segment_count() const { return knots_.empty() ? 0 : knots_.size() - 1; }
    /// Knot parameters; size is point count (+1 when closed).
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<PhasePoint>& points() const { return points_; }
    double length_parameter() const { return knots_.back(); }

    PhasePoint eval(double t) const;
    PhasePoint derivative(double t) const;
    PhasePoint second_derivative(double t) const;
    /// Signed curvature (x'y'' - y'x'') / |r'|^3.
    double curvature(double t) const;

    /// Arc length by 5-point Gauss-Legendre per segment.
    double arc_length() const;

    /// Exact value of the line integral of x dy over the whole curve.
    double integral_x_dy() const;
    /// Exact value of the line integral of y dx over the whole curve.
    double integral_y_dx() const;

    /// For a spline whose x is strictly monotone along the curve, the y value
    /// over abscissa x; nullopt when x is outside the curve's x-range.
    std::optional<double> y_at_x(double x) const;
    double x_min() const;
    double x_max() const;

private:
    struct Cubic {
        double a = 0, b = 0, c = 0, d = 0;  // a + b s + c s^2 + d s^3
        double value(double s) const { return a + s * (b + s * (c + s * d)); }
        double slope(double s) const { return b + s * (2.0 * c + 3.0 * d * s); }
        double curve(double s) const { return 2.0 * c + 6.0 * d * s; }
    };

    std::size_t locate(double t, double& local) const;
    static std::vector<Cubic> build(std::span<const double> values, std::span<const double> knots,
                                    bool closed);

    bool closed_ = false;
    std::vector<PhasePoint> points_;
    std::vector<double> knots_;
    std::vector<Cubic> cx_;
    std::vector<Cubic> cy_;
    bool x_increasing_ = true;
};

}  // namespace jetexit
