#include "jetexit/flowfield.hpp"

#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {

JetParameters make_params(double beta, double a, double epsilon) {
    if (!(beta >= 0.0 && beta <= kBetaMax)) {
        std::ostringstream msg;
        msg << "beta = " << beta << " outside [0, 2/3]";
        throw ParameterError("beta", msg.str());
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        std::ostringstream msg;
        msg << "epsilon = " << epsilon << " outside (0, 1)";
        throw ParameterError("epsilon", msg.str());
    }
    if (!(a > 0.0) || !std::isfinite(a)) {
        std::ostringstream msg;
        msg << "a = " << a << " must be positive";
        throw ParameterError("a", msg.str());
    }
    // 1 - 1.5*beta can dip below zero by round-off at beta = 2/3.
    const double root = std::sqrt(std::max(0.0, 1.0 - 1.5 * beta));
    JetParameters p;
    p.beta_ = beta;
    p.a_ = a;
    p.c_ = (1.0 + root) / 3.0;
    p.k_ = std::sqrt(2.0 * (1.0 + root));
    p.epsilon_ = epsilon;
    return p;
}

double sech2(double y) {
    if (std::abs(y) > 300.0) return 0.0;
    const double s = 1.0 / std::cosh(y);
    return s * s;
}

double stream_function(const JetParameters& p, PhasePoint pt) {
    return -std::tanh(pt.y) + p.a() * sech2(pt.y) * std::cos(p.k() * pt.x) + p.c() * pt.y;
}

VelocityVector velocity(const JetParameters& p, PhasePoint pt) {
    const double s = sech2(pt.y);
    const double t = std::tanh(pt.y);
    const double kx = p.k() * pt.x;
    return {s + 2.0 * p.a() * s * t * std::cos(kx) - p.c(), -p.a() * p.k() * s * std::sin(kx)};
}

Jacobian2 velocity_jacobian(const JetParameters& p, PhasePoint pt) {
    const double s = sech2(pt.y);
    const double t = std::tanh(pt.y);
    const double kx = p.k() * pt.x;
    const double cs = std::cos(kx);
    const double sn = std::sin(kx);
    const double a = p.a();
    const double k = p.k();
    // du/dx and dv/dy share one expression so the trace cancels exactly.
    const double w = 2.0 * a * k * s * t * sn;
    Jacobian2 j;
    j.du_dx = -w;
    j.dv_dy = w;
    j.du_dy = -2.0 * s * t + 2.0 * a * cs * (s * s - 2.0 * s * t * t);
    j.dv_dx = -a * k * k * s * cs;
    return j;
}

PlaneFunction jet_stream_function(const JetParameters& p) {
    PlaneFunction f;
    f.value = [p](PhasePoint pt) { return stream_function(p, pt); };
    // grad(psi) = (psi_x, psi_y) = (v, -u)
    f.gradient = [p](PhasePoint pt) {
        const VelocityVector w = velocity(p, pt);
        return PhasePoint{w.v, -w.u};
    };
    f.hessian = [p](PhasePoint pt) {
        const Jacobian2 j = velocity_jacobian(p, pt);
        return Hessian2{j.dv_dx, j.dv_dy, -j.du_dy};
    };
    return f;
}

DriftField jet_drift(const JetParameters& p) {
    return [p](PhasePoint pt) { return velocity(p, pt); };
}

DriftField zero_drift() {
    return [](PhasePoint) { return VelocityVector{}; };
}

}  // namespace jetexit
