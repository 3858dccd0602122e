#include "jetexit/exitproblem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

bool has_marker(const TriangleMesh& m, BoundaryMarker marker) {
    return std::find(m.markers.begin(), m.markers.end(), marker) != m.markers.end();
}

std::string context(const JetParameters& p, const TriangleMesh& m) {
    std::ostringstream s;
    s << " [beta = " << p.beta() << ", domain = "
      << (m.domain ? to_string(m.domain->kind) : std::string("unknown")) << "]";
    return s.str();
}

// Assembled, periodic-merged system; Dirichlet data still to be applied.
LinearSystem base_system(const JetParameters& p, const std::shared_ptr<const TriangleMesh>& mesh,
                         double rhs_constant, const ExitSettings& s) {
    LinearSystem sys = assemble(mesh, s.drift_for(p), s.diffusion_for(p), rhs_constant, s.stabilization);
    if (!mesh->periodic_pairs.empty()) apply_periodic(sys, mesh->periodic_pairs);
    return sys;
}

void constrain_escape(LinearSystem& sys, BoundaryMarker gamma) {
    const BoundaryMarker other =
        gamma == BoundaryMarker::GammaUpper ? BoundaryMarker::GammaLower : BoundaryMarker::GammaUpper;
    apply_dirichlet(sys, gamma, 1.0);
    apply_dirichlet(sys, other, 0.0);
    if (has_marker(*sys.mesh, BoundaryMarker::Corner)) apply_dirichlet(sys, BoundaryMarker::Corner, 0.5);
}

ExitSolution finish_escape(ScalarField field, BoundaryMarker gamma,
                           const std::shared_ptr<const TriangleMesh>& mesh) {
    ExitSolution sol;
    sol.domain = mesh->domain;
    sol.gamma = gamma;
    sol.field = std::move(field);
    const double area = mesh->domain ? mesh->domain->area : mesh_area(*mesh);
    sol.average = integrate(sol.field) / area;
    const auto [lo, hi] = std::minmax_element(sol.field.values.begin(), sol.field.values.end());
    if (*lo < -0.02 || *hi > 1.02) {
        std::ostringstream w;
        w << "escape probability leaves [-0.02, 1.02]: min " << *lo << ", max " << *hi;
        sol.warnings.push_back(w.str());
    }
    return sol;
}

template <class F>
auto annotate(const JetParameters& p, const TriangleMesh& m, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SolverError& e) {
        throw SolverError(e.what() + context(p, m), e.residual_history());
    }
}

// Fritsch-Carlson monotone cubic Hermite interpolant.
struct Pchip {
    std::vector<double> x, y, d;

    Pchip(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        d.assign(n, 0.0);
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            delta[i] = (y[i + 1] - y[i]) / h[i];
        }
        if (n == 2) {
            d[0] = d[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0) s = 0.0;
            else if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) s = 3.0 * d0;
            return s;
        };
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    double operator()(double t) const {
        std::size_t i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
        const double h = x[i + 1] - x[i];
        const double s = (t - x[i]) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
    }
};

std::vector<const SweepRow*> populated(const SweepTable& t, double lo, double hi) {
    std::vector<const SweepRow*> rows;
    for (const SweepRow& r : t.rows) {
        if (r.ok && r.beta >= lo && r.beta <= hi) rows.push_back(&r);
    }
    return rows;
}

}  // namespace

std::shared_ptr<const TriangleMesh> build_mesh(const DomainSpec& d, const Resolution& r) {
    TriangleMesh m = d.kind == DomainKind::Eddy ? mesh_eddy(d, r.eddy_radial, r.eddy_angular)
                                                : mesh_jet_core(d, r.core_x, r.core_y);
    for (int i = 0; i < r.refinements; ++i) m = refine_uniform(m);
    return std::make_shared<const TriangleMesh>(std::move(m));
}

EscapePair solve_escape_pair(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                             const ExitSettings& s) {
    return annotate(p, *mesh, [&] {
        LinearSystem upper = base_system(p, mesh, 0.0, s);
        LinearSystem lower = upper;
        constrain_escape(upper, BoundaryMarker::GammaUpper);
        constrain_escape(lower, BoundaryMarker::GammaLower);
        auto fields = solve_many(upper, {upper.rhs, lower.rhs}, s.solver, FieldMeaning::EscapeProbability);
        EscapePair pair;
        pair.upper = finish_escape(std::move(fields[0]), BoundaryMarker::GammaUpper, mesh);
        pair.lower = finish_escape(std::move(fields[1]), BoundaryMarker::GammaLower, mesh);
        return pair;
    });
}

ExitSolution solve_escape(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                          BoundaryMarker gamma, const ExitSettings& s) {
    if (gamma != BoundaryMarker::GammaUpper && gamma != BoundaryMarker::GammaLower) {
        throw MarkerError("escape target must be gamma_upper or gamma_lower");
    }
    return annotate(p, *mesh, [&] {
        LinearSystem sys = base_system(p, mesh, 0.0, s);
        constrain_escape(sys, gamma);
        return finish_escape(solve(sys, s.solver, FieldMeaning::EscapeProbability), gamma, mesh);
    });
}

ExitSolution solve_escape(const JetParameters& p, const DomainSpec& d, BoundaryMarker gamma,
                          const Resolution& r, const ExitSettings& s) {
    return solve_escape(p, build_mesh(d, r), gamma, s);
}

ScalarField solve_mrt(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                      const ExitSettings& s) {
    return annotate(p, *mesh, [&] {
        LinearSystem sys = base_system(p, mesh, -1.0, s);
        apply_dirichlet(sys, BoundaryMarker::GammaUpper, 0.0);
        apply_dirichlet(sys, BoundaryMarker::GammaLower, 0.0);
        if (has_marker(*mesh, BoundaryMarker::Corner)) apply_dirichlet(sys, BoundaryMarker::Corner, 0.0);
        return solve(sys, s.solver, FieldMeaning::ResidenceTime);
    });
}

ScalarField solve_mrt(const JetParameters& p, const DomainSpec& d, const Resolution& r,
                      const ExitSettings& s) {
    return solve_mrt(p, build_mesh(d, r), s);
}

std::string to_string(SweepColumn c) {
    switch (c) {
        case SweepColumn::EddyUpper: return "p_eddy_upper";
        case SweepColumn::EddyLower: return "p_eddy_lower";
        case SweepColumn::CoreUpper: return "p_core_upper";
        case SweepColumn::CoreLower: return "p_core_lower";
        case SweepColumn::MaxMrtEddy: return "max_mrt_eddy";
        case SweepColumn::MaxMrtCore: return "max_mrt_core";
    }
    return "unknown";
}

double SweepRow::get(SweepColumn c) const {
    switch (c) {
        case SweepColumn::EddyUpper: return p_eddy_upper;
        case SweepColumn::EddyLower: return p_eddy_lower;
        case SweepColumn::CoreUpper: return p_core_upper;
        case SweepColumn::CoreLower: return p_core_lower;
        case SweepColumn::MaxMrtEddy: return max_mrt_eddy;
        case SweepColumn::MaxMrtCore: return max_mrt_core;
    }
    return 0.0;
}

SweepRow sweep_row(double beta, const Resolution& r, JetPhase phase, const ExitSettings& s) {
    SweepRow row;
    row.beta = beta;
    try {
        const JetParameters p = make_params(beta);
        const DomainSpec eddy = build_eddy_domain(p, s.trace_step);
        const DomainSpec core = build_jet_core_domain(p, phase, s.trace_step);
        const auto eddy_mesh = build_mesh(eddy, r);
        const auto core_mesh = build_mesh(core, r);
        const EscapePair pe = solve_escape_pair(p, eddy_mesh, s);
        const EscapePair pc = solve_escape_pair(p, core_mesh, s);
        row.p_eddy_upper = pe.upper.average;
        row.p_eddy_lower = pe.lower.average;
        row.p_core_upper = pc.upper.average;
        row.p_core_lower = pc.lower.average;
        row.max_mrt_eddy = field_extremum(solve_mrt(p, eddy_mesh, s)).value;
        row.max_mrt_core = field_extremum(solve_mrt(p, core_mesh, s)).value;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

SweepTable sweep_beta(const std::vector<double>& betas, const Resolution& r, JetPhase phase,
                      const ExitSettings& s, const std::function<void(const SweepRow&)>& progress) {
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] >= 0.0 && betas[i] <= kBetaMax)) {
            throw ParameterError("betas", "sweep beta outside [0, 2/3]");
        }
        if (i > 0 && !(betas[i] > betas[i - 1])) {
            throw ParameterError("betas", "sweep betas must be strictly increasing");
        }
    }
    SweepTable table;
    table.phase = phase;
    double last = -1.0;
    for (double b : betas) {
        const double clipped = std::clamp(b, 1e-3, kBetaMax - 1e-3);
        if (clipped <= last) continue;
        last = clipped;
        table.rows.push_back(sweep_row(clipped, r, phase, s));
        if (progress) progress(table.rows.back());
    }
    return table;
}

std::vector<double> refine_grid(const std::vector<double>& betas, const std::vector<double>& features,
                                double step) {
    std::vector<double> out = betas;
    for (double f : features) {
        for (int k = -2; k <= 2; ++k) {
            const double b = std::round((f + k * step) / (0.25 * step)) * (0.25 * step);
            if (b < 1e-3 || b > kBetaMax - 1e-3) continue;
            out.push_back(b);
        }
    }
    std::sort(out.begin(), out.end());
    std::vector<double> dedup;
    for (double b : out) {
        if (dedup.empty() || b - dedup.back() > 0.125 * step) dedup.push_back(b);
    }
    return dedup;
}

void merge_rows(SweepTable& table, const SweepTable& extra) {
    for (const SweepRow& r : extra.rows) {
        const bool present = std::any_of(table.rows.begin(), table.rows.end(), [&](const SweepRow& q) {
            return std::abs(q.beta - r.beta) < 1e-12;
        });
        if (!present) table.rows.push_back(r);
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.beta < b.beta; });
}

double find_crossing(const SweepTable& t, SweepColumn col_a, SweepColumn col_b, double beta_min,
                     double beta_max) {
    const auto rows = populated(t, beta_min, beta_max);
    std::vector<double> xs, ds;
    for (const SweepRow* r : rows) {
        xs.push_back(r->beta);
        ds.push_back(r->get(col_a) - r->get(col_b));
    }
    std::string pattern;
    for (double d : ds) pattern += d > 0.0 ? '+' : (d < 0.0 ? '-' : '0');
    std::vector<std::size_t> changes;
    for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
        if ((ds[i] > 0.0) != (ds[i + 1] > 0.0)) changes.push_back(i);
    }
    if (changes.size() != 1 || xs.size() < 2) {
        std::ostringstream msg;
        msg << "expected exactly one sign change of " << to_string(col_a) << " - " << to_string(col_b)
            << ", sign pattern '" << pattern << "'";
        throw CrossingStructureError(msg.str());
    }
    const std::size_t i = changes.front();
    if (ds[i] == 0.0) return xs[i];
    const Pchip interp(xs, ds);
    double lo = xs[i];
    double hi = xs[i + 1];
    const double f_lo = ds[i];
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = interp(mid);
        if (std::abs(f) < 1e-15) return mid;
        if ((f > 0.0) == (f_lo > 0.0)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double find_crossing(const SweepTable& t, SweepColumn col_a, SweepColumn col_b) {
    return find_crossing(t, col_a, col_b, -1.0, 2.0);
}

double find_extremum(const SweepTable& t, SweepColumn col) {
    const auto rows = populated(t, -1.0, 2.0);
    if (rows.size() < 3) throw ExtremumStructureError("need at least three populated rows");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i]->get(col) > rows[best]->get(col)) best = i;
    }
    if (best == 0 || best + 1 == rows.size()) {
        throw ExtremumStructureError(to_string(col) + " has its maximum at the sweep boundary");
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double d = rows[i + 1]->get(col) - rows[i]->get(col);
        if ((i < best && d < 0.0) || (i >= best && d > 0.0)) {
            std::ostringstream msg;
            msg << to_string(col) << " is not unimodal: direction breaks between beta = "
                << rows[i]->beta << " and " << rows[i + 1]->beta;
            throw ExtremumStructureError(msg.str());
        }
    }
    const double x0 = rows[best - 1]->beta, x1 = rows[best]->beta, x2 = rows[best + 1]->beta;
    const double y0 = rows[best - 1]->get(col), y1 = rows[best]->get(col), y2 = rows[best + 1]->get(col);
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den == 0.0) return x1;
    return x1 - 0.5 * num / den;
}

MonotonicityVerdict monotonicity_check(const SweepTable& t, SweepColumn col) {
    const auto rows = populated(t, -1.0, 2.0);
    MonotonicityVerdict v;
    bool inc = true;
    bool dec = true;
    int direction = 0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double d = rows[i + 1]->get(col) - rows[i]->get(col);
        if (d == 0.0) v.ties.emplace_back(i, i + 1);
        if (!(d > 0.0)) inc = false;
        if (!(d < 0.0)) dec = false;
        const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (!v.first_violation) {
            if (s == 0 || (direction != 0 && s != direction)) v.first_violation = {i, i + 1};
            else if (direction == 0) direction = s;
        }
    }
    if (rows.size() >= 2 && inc) v.trend = Trend::Increasing;
    else if (rows.size() >= 2 && dec) v.trend = Trend::Decreasing;
    if (v.trend != Trend::Neither) v.first_violation.reset();
    return v;
}

std::vector<double> default_sweep_grid() {
    std::vector<double> g;
    for (int i = 0; i < 28; ++i) g.push_back(0.01 + (0.65 - 0.01) * i / 27.0);
    return g;
}

}  // namespace jetexit
