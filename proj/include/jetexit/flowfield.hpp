#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace jetexit {

/// A point of the (x, y) phase plane. Doubles as a plain 2-vector.
struct PhasePoint {
    double x = 0.0;
    double y = 0.0;

    friend PhasePoint operator+(PhasePoint a, PhasePoint b) { return {a.x + b.x, a.y + b.y}; }
    friend PhasePoint operator-(PhasePoint a, PhasePoint b) { return {a.x - b.x, a.y - b.y}; }
    friend PhasePoint operator*(double s, PhasePoint a) { return {s * a.x, s * a.y}; }
    friend bool operator==(PhasePoint, PhasePoint) = default;
};

inline double dot(PhasePoint a, PhasePoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(PhasePoint a, PhasePoint b) { return a.x * b.y - a.y * b.x; }
inline double norm(PhasePoint a) { return std::hypot(a.x, a.y); }
inline double distance(PhasePoint a, PhasePoint b) { return norm(a - b); }

/// Drift components (a1, a2) of the particle equations.
struct VelocityVector {
    double u = 0.0;
    double v = 0.0;
};

inline double speed(VelocityVector w) { return std::hypot(w.u, w.v); }

/// d(u, v) / d(x, y).
struct Jacobian2 {
    double du_dx = 0.0;
    double du_dy = 0.0;
    double dv_dx = 0.0;
    double dv_dy = 0.0;

    double trace() const { return du_dx + dv_dy; }
    double det() const { return du_dx * dv_dy - du_dy * dv_dx; }
};

/// Parameters of the randomly perturbed meandering jet. Immutable; build with
/// make_params() so that c and k stay tied to beta.
class JetParameters {
public:
    double beta() const { return beta_; }
    double a() const { return a_; }
    double c() const { return c_; }
    double k() const { return k_; }
    double epsilon() const { return epsilon_; }
    /// Zonal period 2*pi/k of the flow.
    double period() const { return 2.0 * std::numbers::pi / k_; }

    friend JetParameters make_params(double beta, double a, double epsilon);

private:
    JetParameters() = default;
    double beta_ = 0.0;
    double a_ = 0.0;
    double c_ = 0.0;
    double k_ = 0.0;
    double epsilon_ = 0.0;
};

inline constexpr double kBetaMax = 2.0 / 3.0;
inline constexpr double kDefaultAmplitude = 0.01;
inline constexpr double kDefaultEpsilon = 0.001;

/// c = (1 + sqrt(1 - 3 beta / 2)) / 3, k = sqrt(2 (1 + sqrt(1 - 3 beta / 2))).
/// Throws ParameterError naming the field when beta is outside [0, 2/3],
/// epsilon outside (0, 1), or a <= 0.
JetParameters make_params(double beta, double a = kDefaultAmplitude,
                          double epsilon = kDefaultEpsilon);

/// sech^2(y), returning 0 for |y| > 300.
double sech2(double y);

double stream_function(const JetParameters& p, PhasePoint pt);
VelocityVector velocity(const JetParameters& p, PhasePoint pt);
Jacobian2 velocity_jacobian(const JetParameters& p, PhasePoint pt);

/// Second derivatives of the stream function.
struct Hessian2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

/// A scalar function of the plane with its gradient and Hessian. The level-set
/// tracer works on this so synthetic test functions can stand in for the jet.
struct PlaneFunction {
    std::function<double(PhasePoint)> value;
    std::function<PhasePoint(PhasePoint)> gradient;
    std::function<Hessian2(PhasePoint)> hessian;
};

PlaneFunction jet_stream_function(const JetParameters& p);

/// Drift field a(x, y) used by assembly and simulation.
using DriftField = std::function<VelocityVector(PhasePoint)>;

DriftField jet_drift(const JetParameters& p);

/// Zero velocity everywhere, for pure-diffusion test problems.
DriftField zero_drift();

}  // namespace jetexit
