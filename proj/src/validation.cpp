#include "jetexit/validation.hpp"

#include <cmath>
#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {

std::vector<PhasePoint> probe_points(const DomainSpec& d, std::size_t n) {
    if (n < 2 || n % 2 != 0) throw ParameterError("n_probes", "probe count must be even and >= 2");
    const std::size_t cols = n / 2;
    std::vector<PhasePoint> pts;
    for (std::size_t i = 0; i < cols; ++i) {
        // Eddy probes stay away from the thin tips.
        const double s = d.kind == DomainKind::Eddy ? (static_cast<double>(i) + 1.0) / (static_cast<double>(cols) + 1.0)
                                                    : (static_cast<double>(i) + 0.5) / static_cast<double>(cols);
        const double x = d.x_left + s * d.period();
        const auto up = d.boundary_y(BoundaryMarker::GammaUpper, x);
        const auto lo = d.boundary_y(BoundaryMarker::GammaLower, x);
        if (!up || !lo) throw GeometryError("probe column outside the boundary chains");
        for (double f : {0.3, 0.7}) pts.push_back({x, *lo + f * (*up - *lo)});
    }
    return pts;
}

double default_mc_dt(DomainKind kind) {
    return kind == DomainKind::Eddy ? 1e-3 : 1e-2;
}

CrossValidation cross_validate(const JetParameters& p, const DomainSpec& d,
                               std::shared_ptr<const TriangleMesh> mesh, const ExitSettings& s,
                               const ValidationOptions& o) {
    const EscapePair pair = solve_escape_pair(p, mesh, s);
    const ScalarField mrt = solve_mrt(p, mesh, s);
    const double diffusion = s.diffusion_for(p);
    const DriftField drift = s.drift_for(p);
    // Exit-time tails are roughly exponential with a scale near the largest
    // residence time; at 10x that scale about one path in 2e4 is still
    // inside, so cap at 30x.
    const double time_cap = 30.0 * field_extremum(mrt).value;

    CrossValidation cv;
    cv.pass = true;
    const auto probes = probe_points(d, o.n_probes);
    for (const PhasePoint& q : probes) {
        ProbeComparison c;
        c.point = q;
        const auto pe = interpolate(pair.upper.field, q);
        const auto tm = interpolate(mrt, q);
        if (!pe || !tm) {
            std::ostringstream msg;
            msg << "probe (" << q.x << ", " << q.y << ") is outside the mesh";
            throw GeometryError(msg.str());
        }
        c.fem_escape_upper = *pe;
        c.fem_mrt = *tm;
        McOptions mo = o.mc;
        mo.diffusion = diffusion;
        mo.max_time = time_cap;
        c.mc = s.drift_override ? simulate_first_exit(drift, diffusion, d, q, mo) : simulate_first_exit(p, d, q, mo);
        const double pm = c.mc.fraction(BoundaryMarker::GammaUpper);
        const double n = static_cast<double>(c.mc.n_paths);
        const double se_p = std::max(c.mc.std_err_prob.at(BoundaryMarker::GammaUpper), 1.0 / n);
        c.z_escape = std::abs(pm - c.fem_escape_upper) / se_p;
        c.z_time = c.mc.std_err_time > 0.0 ? std::abs(c.mc.mean_exit_time - c.fem_mrt) / c.mc.std_err_time : 0.0;
        c.pass = c.z_escape <= o.z_limit && c.z_time <= o.z_limit;
        cv.pass = cv.pass && c.pass;
        cv.probes.push_back(std::move(c));
    }
    if (o.run_dt_study) {
        McOptions mo = o.mc;
        mo.n_paths = o.study_paths;
        mo.diffusion = diffusion;
        mo.max_time = time_cap;
        const double dt = o.mc.dt;
        const std::vector<double> dts{4.0 * dt, 2.0 * dt, dt};
        cv.dt_study = s.drift_override ? dt_convergence_study(drift, diffusion, d, probes.front(), dts, mo)
                                       : dt_convergence_study(p, d, probes.front(), dts, mo);
    }
    return cv;
}

}  // namespace jetexit
