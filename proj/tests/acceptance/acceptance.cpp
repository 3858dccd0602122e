// End-to-end acceptance run: one PASS/FAIL line per criterion on stdout,
// diagnostics indented below each, a JSON report and the figures in the
// output directory (first argument, default ./acceptance_out).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "jetexit/error.hpp"
#include "jetexit/exitproblem.hpp"
#include "jetexit/io.hpp"
#include "jetexit/mc_oracle.hpp"
#include "jetexit/validation.hpp"

using namespace jetexit;
namespace fs = std::filesystem;

namespace {

// Targets and tolerances.
constexpr double kEddyCrossingTarget = 0.3333;
constexpr double kEddyPeakTarget = 0.54;
constexpr double kCoreLowTarget = 0.115;
constexpr double kCoreHighTarget = 0.385;
constexpr double kEddyMrtPeakTarget = 0.432;
constexpr double kBetaBand = 0.03;
constexpr double kCoreBandGap = 0.05;
constexpr double kDiskRelTol = 0.01;
constexpr double kStripTol = 1e-6;
constexpr double kComplementAverageTol = 2e-3;
constexpr double kComplementFieldFactor = 2.0;  // times the solver tolerance
constexpr double kZLimit = 3.0;
constexpr std::size_t kMcPaths = 10000;
constexpr std::size_t kMcProbes = 10;
constexpr double kMcBudgetSeconds = 20.0 * 60.0;
constexpr double kMmsOrder = 1.8;
constexpr double kSweepStability = 5e-3;
constexpr double kMonotoneSlack = 1e-6;
constexpr double kRefineStep = 0.01;

struct Verdict {
    int id = 0;
    bool pass = false;
    std::string summary;
    std::vector<std::string> notes;
    json detail = json::object();
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sign_pattern(const SweepTable& t, SweepColumn a, SweepColumn b) {
    std::string s;
    for (const SweepRow& r : t.rows) {
        if (!r.ok) continue;
        const double d = r.get(a) - r.get(b);
        s += d > 0.0 ? '+' : (d < 0.0 ? '-' : '0');
    }
    return s;
}

// Row index of the extreme value of a column (max, or min with sign = -1).
std::size_t arg_extreme(const SweepTable& t, const std::function<double(const SweepRow&)>& f, double sign) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].ok && sign * f(t.rows[i]) > sign * f(t.rows[best])) best = i;
    }
    return best;
}

// Beta positions where a difference column changes sign, located in windows
// that each hold one sign change.
std::vector<double> all_crossings(const SweepTable& t, SweepColumn a, SweepColumn b) {
    std::vector<const SweepRow*> rows;
    for (const SweepRow& r : t.rows) {
        if (r.ok) rows.push_back(&r);
    }
    std::vector<std::size_t> changes;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double d0 = rows[i]->get(a) - rows[i]->get(b);
        const double d1 = rows[i + 1]->get(a) - rows[i + 1]->get(b);
        if ((d0 < 0.0) != (d1 < 0.0)) changes.push_back(i);
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < changes.size(); ++k) {
        const double lo = k == 0 ? rows.front()->beta : rows[changes[k - 1] + 1]->beta;
        const double hi = k + 1 == changes.size() ? rows.back()->beta : rows[changes[k + 1]]->beta;
        out.push_back(find_crossing(t, a, b, lo, hi));
    }
    return out;
}

json row_json(const SweepRow& r) {
    return {{"beta", r.beta},           {"p_eddy_upper", r.p_eddy_upper}, {"p_eddy_lower", r.p_eddy_lower},
            {"p_core_upper", r.p_core_upper}, {"p_core_lower", r.p_core_lower}, {"max_mrt_eddy", r.max_mrt_eddy},
            {"max_mrt_core", r.max_mrt_core}, {"ok", r.ok}, {"error", r.error}};
}

// ---------------------------------------------------------------- sweep

struct SweepResult {
    SweepTable table;
    std::vector<double> grid;
    double seconds = 0.0;
};

SweepResult run_sweep(const Resolution& res, const ExitSettings& s) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult out;
    const auto base = default_sweep_grid();
    out.table = sweep_beta(base, res, JetPhase::Trough, s);

    // Local refinement around each feature the criteria look at: crossings
    // where they exist, else the closest approach; discrete extrema.
    std::vector<double> features;
    const auto& t = out.table;
    for (auto [a, b] : {std::pair{SweepColumn::EddyLower, SweepColumn::EddyUpper},
                        std::pair{SweepColumn::CoreUpper, SweepColumn::CoreLower}}) {
        std::vector<double> xs;
        try {
            xs = all_crossings(t, a, b);
        } catch (const Error&) {
        }
        if (xs.empty() || xs.size() > 4) {
            const auto i = arg_extreme(t, [a, b](const SweepRow& r) { return std::abs(r.get(a) - r.get(b)); }, -1.0);
            xs = {t.rows[i].beta};
        }
        features.insert(features.end(), xs.begin(), xs.end());
    }
    features.push_back(t.rows[arg_extreme(t, [](const SweepRow& r) { return r.p_eddy_lower; }, 1.0)].beta);
    features.push_back(t.rows[arg_extreme(t, [](const SweepRow& r) { return r.max_mrt_eddy; }, 1.0)].beta);

    out.grid = refine_grid(base, features, kRefineStep);
    std::vector<double> extra;
    for (double b : out.grid) {
        const bool known = std::any_of(t.rows.begin(), t.rows.end(), [b](const SweepRow& r) { return std::abs(r.beta - b) < 1e-12; });
        if (!known) extra.push_back(b);
    }
    if (!extra.empty()) merge_rows(out.table, sweep_beta(extra, res, JetPhase::Trough, s));
    out.seconds = seconds_since(t0);
    return out;
}

// ---------------------------------------------------------------- criteria

Verdict criterion_eddy_crossing(const SweepResult& sw) {
    Verdict v;
    v.id = 1;
    const auto& t = sw.table;
    const std::string pattern = sign_pattern(t, SweepColumn::EddyLower, SweepColumn::EddyUpper);
    double dmin = 1e300, dmax = -1e300;
    for (const SweepRow& r : t.rows) {
        if (!r.ok) continue;
        dmin = std::min(dmin, r.p_eddy_lower - r.p_eddy_upper);
        dmax = std::max(dmax, r.p_eddy_lower - r.p_eddy_upper);
    }
    v.detail["sign_pattern"] = pattern;
    v.detail["difference_range"] = {dmin, dmax};
    v.notes.push_back("P_lower - P_upper ranges over [" + sci(dmin) + ", " + sci(dmax) + "], sign pattern " + pattern);
    try {
        const double x = find_crossing(t, SweepColumn::EddyLower, SweepColumn::EddyUpper);
        v.detail["crossing"] = x;
        v.pass = std::abs(x - kEddyCrossingTarget) <= kBetaBand;
        v.summary = "eddy crossing at beta = " + fmt(x) + " (target " + fmt(kEddyCrossingTarget) + " +- " + fmt(kBetaBand, 2) + ")";
    } catch (const CrossingStructureError& e) {
        v.summary = std::string("eddy escape curves do not cross once: ") + e.what();
    }
    return v;
}

Verdict criterion_eddy_peak(const SweepResult& sw) {
    Verdict v;
    v.id = 2;
    const auto& t = sw.table;
    const auto imax = arg_extreme(t, [](const SweepRow& r) { return r.p_eddy_lower; }, 1.0);
    const auto imin = arg_extreme(t, [](const SweepRow& r) { return r.p_eddy_lower; }, -1.0);
    v.detail["discrete_max_beta"] = t.rows[imax].beta;
    v.detail["discrete_min_beta"] = t.rows[imin].beta;
    v.notes.push_back("P_lower discrete max " + fmt(t.rows[imax].p_eddy_lower, 5) + " at beta " + fmt(t.rows[imax].beta) +
                      ", min " + fmt(t.rows[imin].p_eddy_lower, 5) + " at beta " + fmt(t.rows[imin].beta));
    try {
        const double x = find_extremum(t, SweepColumn::EddyLower);
        v.detail["peak"] = x;
        v.pass = std::abs(x - kEddyPeakTarget) <= kBetaBand;
        v.summary = "P_lower peaks at beta = " + fmt(x) + " (target " + fmt(kEddyPeakTarget) + " +- " + fmt(kBetaBand, 2) + ")";
    } catch (const ExtremumStructureError& e) {
        v.summary = std::string("no interior peak of P_lower: ") + e.what();
    }
    return v;
}

Verdict criterion_core_band(const SweepResult& sw) {
    Verdict v;
    v.id = 3;
    const auto& t = sw.table;
    double dmax = 0.0;
    for (const SweepRow& r : t.rows) {
        if (r.ok) dmax = std::max(dmax, std::abs(r.p_core_upper - r.p_core_lower));
    }
    const std::string pattern = sign_pattern(t, SweepColumn::CoreUpper, SweepColumn::CoreLower);
    v.detail["max_abs_difference"] = dmax;
    v.detail["sign_pattern"] = pattern;
    v.notes.push_back("max |P_upper - P_lower| over the sweep = " + sci(dmax) + ", sign pattern " + pattern);
    std::vector<double> xs;
    try {
        xs = all_crossings(t, SweepColumn::CoreUpper, SweepColumn::CoreLower);
    } catch (const Error& e) {
        v.notes.push_back(std::string("crossing search failed: ") + e.what());
    }
    v.detail["crossings"] = xs;
    if (xs.size() != 2) {
        v.summary = "expected 2 crossings of the jet-core escape curves, found " + std::to_string(xs.size());
        return v;
    }
    double band_gap = 0.0;
    for (const SweepRow& r : t.rows) {
        if (r.ok && r.beta > xs[0] && r.beta < xs[1]) band_gap = std::max(band_gap, std::abs(r.p_core_upper - r.p_core_lower));
    }
    v.pass = std::abs(xs[0] - kCoreLowTarget) <= kBetaBand && std::abs(xs[1] - kCoreHighTarget) <= kBetaBand &&
             band_gap < kCoreBandGap;
    v.summary = "crossings at beta = " + fmt(xs[0]) + ", " + fmt(xs[1]) + "; max gap in band " + sci(band_gap);
    return v;
}

Verdict criterion_mrt(const SweepResult& sw) {
    Verdict v;
    v.id = 4;
    const auto& t = sw.table;
    bool eddy_ok = false;
    std::string eddy_msg;
    try {
        const double x = find_extremum(t, SweepColumn::MaxMrtEddy);
        v.detail["eddy_peak"] = x;
        eddy_ok = std::abs(x - kEddyMrtPeakTarget) <= kBetaBand;
        eddy_msg = "eddy max-MRT peak at beta = " + fmt(x);
    } catch (const ExtremumStructureError& e) {
        eddy_msg = std::string("eddy max-MRT has no interior peak (") + e.what() + ")";
    }
    const auto ev = monotonicity_check(t, SweepColumn::MaxMrtEddy);
    const auto cv = monotonicity_check(t, SweepColumn::MaxMrtCore);
    const bool core_ok = cv.trend == Trend::Increasing;
    auto trend_name = [](Trend tr) {
        return tr == Trend::Increasing ? "increasing" : (tr == Trend::Decreasing ? "decreasing" : "neither");
    };
    const auto& f = t.rows.front();
    const auto& l = t.rows.back();
    v.notes.push_back(std::string("eddy max MRT ") + fmt(f.max_mrt_eddy, 2) + " -> " + fmt(l.max_mrt_eddy, 2) + ", trend " + trend_name(ev.trend));
    v.notes.push_back(std::string("core max MRT ") + fmt(f.max_mrt_core, 2) + " -> " + fmt(l.max_mrt_core, 2) + ", trend " + trend_name(cv.trend));
    if (cv.first_violation) {
        v.notes.push_back("core first violation between rows " + std::to_string(cv.first_violation->first) + " and " +
                          std::to_string(cv.first_violation->second));
    }
    v.detail["eddy_trend"] = trend_name(ev.trend);
    v.detail["core_trend"] = trend_name(cv.trend);
    v.detail["eddy_part_pass"] = eddy_ok;
    v.detail["core_part_pass"] = core_ok;
    v.pass = eddy_ok && core_ok;
    v.summary = eddy_msg + " (target " + fmt(kEddyMrtPeakTarget) + " +- " + fmt(kBetaBand, 2) + ") [" + (eddy_ok ? "ok" : "fail") +
                "]; core max-MRT strictly increasing [" + (core_ok ? "ok" : "fail") + "]";
    return v;
}

Verdict criterion_analytic() {
    Verdict v;
    v.id = 5;
    const auto p = make_params(1.0 / 3.0);
    ExitSettings s;
    s.drift_override = zero_drift();
    s.diffusion = p.epsilon();

    const double radius = 0.5;
    const auto disk = make_disk_domain({0.0, 0.0}, radius);
    Resolution r;
    r.eddy_radial = 8;
    r.eddy_angular = 32;
    r.refinements = 2;
    const auto mrt = solve_mrt(p, disk, r, s);
    const auto center = interpolate(mrt, {0.0, 0.0});
    const double exact = radius * radius / (4.0 * p.epsilon());
    const double rel = std::abs(center.value_or(0.0) - exact) / exact;

    const auto strip = make_strip_domain(0.0, p.period(), -0.5, 0.5);
    const auto esc = solve_escape(p, strip, BoundaryMarker::GammaUpper, Resolution{}, s);
    const double strip_err = std::abs(esc.average - 0.5);

    v.detail = {{"disk_center", center.value_or(0.0)}, {"disk_exact", exact}, {"disk_rel_error", rel},
                {"strip_average", esc.average}};
    v.pass = center && rel < kDiskRelTol && strip_err <= kStripTol;
    v.summary = "disk MRT " + fmt(center.value_or(0.0), 3) + " vs " + fmt(exact, 3) + " (rel " + sci(rel) + "); strip average " +
                fmt(esc.average, 9);
    return v;
}

Verdict criterion_complement(const SweepResult& sw) {
    Verdict v;
    v.id = 6;
    const ExitSettings s;
    double worst_avg = 0.0;
    for (const SweepRow& r : sw.table.rows) {
        if (!r.ok) continue;
        worst_avg = std::max(worst_avg, std::abs(r.p_eddy_upper + r.p_eddy_lower - 1.0));
        worst_avg = std::max(worst_avg, std::abs(r.p_core_upper + r.p_core_lower - 1.0));
    }
    // Pointwise check on every base-grid configuration.
    double worst_field = 0.0;
    const Resolution res;
    for (double beta : default_sweep_grid()) {
        const auto p = make_params(beta);
        for (int k = 0; k < 2; ++k) {
            const DomainSpec d = k == 0 ? build_eddy_domain(p, s.trace_step) : build_jet_core_domain(p, JetPhase::Trough, s.trace_step);
            const auto pair = solve_escape_pair(p, build_mesh(d, res), s);
            for (std::size_t i = 0; i < pair.upper.field.values.size(); ++i) {
                worst_field = std::max(worst_field, std::abs(pair.upper.field.values[i] + pair.lower.field.values[i] - 1.0));
            }
        }
    }
    const double field_tol = kComplementFieldFactor * s.solver.tol;
    v.detail = {{"worst_average_defect", worst_avg}, {"worst_pointwise_defect", worst_field}, {"pointwise_tol", field_tol}};
    v.pass = worst_avg <= kComplementAverageTol && worst_field <= field_tol;
    v.summary = "max |P_u + P_l - 1| (averages) = " + sci(worst_avg) + ", pointwise = " + sci(worst_field) + " over " +
                std::to_string(sw.table.rows.size()) + " sweep rows";
    return v;
}

Verdict criterion_mc(const fs::path& out) {
    Verdict v;
    v.id = 7;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = make_params(1.0 / 3.0);
    const ExitSettings s;
    const Resolution res;
    bool all_ok = true;
    for (int k = 0; k < 2; ++k) {
        const DomainSpec d = k == 0 ? build_eddy_domain(p, s.trace_step) : build_jet_core_domain(p, JetPhase::Trough, s.trace_step);
        const std::string name = k == 0 ? "eddy" : "jet-core";
        ValidationOptions o;
        o.n_probes = kMcProbes;
        o.z_limit = kZLimit;
        o.mc.n_paths = kMcPaths;
        o.mc.seed = 1;
        o.mc.dt = default_mc_dt(d.kind);
        const auto cv = cross_validate(p, d, build_mesh(d, res), s, o);
        double worst_z = 0.0;
        json probes = json::array();
        for (const auto& c : cv.probes) {
            worst_z = std::max({worst_z, c.z_escape, c.z_time});
            probes.push_back({{"point", {c.point.x, c.point.y}}, {"fem_escape_upper", c.fem_escape_upper},
                              {"fem_mrt", c.fem_mrt}, {"mc", to_json(c.mc)}, {"z_escape", c.z_escape},
                              {"z_time", c.z_time}, {"pass", c.pass}});
        }
        json study = json::array();
        for (const auto& r : cv.dt_study.rows) {
            study.push_back({{"dt", r.dt}, {"p_upper", r.stats.fraction(BoundaryMarker::GammaUpper)},
                             {"mean_exit_time", r.stats.mean_exit_time}, {"agrees_with_previous", r.agrees_with_previous}});
        }
        v.detail[name] = {{"probes", probes}, {"dt_study", study}, {"dt_converged", cv.dt_study.converged}, {"dt", o.mc.dt}};
        v.notes.push_back(name + ": dt " + sci(o.mc.dt) + ", worst z = " + fmt(worst_z, 2) + ", probes " + (cv.pass ? "agree" : "disagree") +
                          ", dt study " + (cv.dt_study.converged ? "converged" : "not converged"));
        all_ok = all_ok && cv.pass && cv.dt_study.converged;
    }
    const double secs = seconds_since(t0);
    v.detail["seconds"] = secs;
    write_text(out / "mc_validation.json", v.detail.dump(2));
    v.pass = all_ok && secs <= kMcBudgetSeconds;
    v.summary = "FEM vs MC at beta = 1/3, " + std::to_string(kMcProbes) + " probes x " + std::to_string(kMcPaths) +
                " paths per domain, " + fmt(secs, 0) + " s";
    return v;
}

double mms_order() {
    const auto exact = [](PhasePoint q) { return std::sin(q.x) * std::cos(q.y); };
    const double au = 1.0, av = 0.5;
    const SourceFunction f = [au, av](PhasePoint q) {
        return -2.0 * std::sin(q.x) * std::cos(q.y) + au * std::cos(q.x) * std::cos(q.y) - av * std::sin(q.x) * std::sin(q.y);
    };
    const DriftField drift = [au, av](PhasePoint) { return VelocityVector{au, av}; };
    auto mesh = mesh_jet_core(make_strip_domain(0.0, 2.0, -1.0, 1.0), 8, 8);
    std::vector<double> err;
    for (int level = 0; level < 4; ++level) {
        auto shared = std::make_shared<const TriangleMesh>(mesh);
        auto sys = assemble(shared, drift, 1.0, f, Stabilization::None);
        std::vector<std::size_t> outline;
        std::vector<char> side(mesh.vertex_count(), 0);
        for (const auto& [l, r] : mesh.periodic_pairs) side[l] = side[r] = 1;
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            if (mesh.markers[i] != BoundaryMarker::Interior || side[i]) outline.push_back(i);
        }
        apply_dirichlet(sys, outline, exact);
        err.push_back(l2_error(solve(sys), exact));
        mesh = refine_uniform(mesh);
    }
    double worst = 1e300;
    for (std::size_t i = 1; i < err.size(); ++i) worst = std::min(worst, std::log2(err[i - 1] / err[i]));
    return worst;
}

Verdict criterion_convergence() {
    Verdict v;
    v.id = 8;
    const double order = mms_order();
    Resolution fine;
    fine.refinements = 1;
    double worst_p = 0.0, worst_t = 0.0;
    json rows = json::array();
    for (double beta : {0.1, 1.0 / 3.0, 0.55}) {
        const auto a = sweep_row(beta, Resolution{}, JetPhase::Trough, ExitSettings{});
        const auto b = sweep_row(beta, fine, JetPhase::Trough, ExitSettings{});
        if (!a.ok || !b.ok) {
            v.summary = "sweep row failed at beta " + fmt(beta) + ": " + a.error + b.error;
            return v;
        }
        for (SweepColumn c : {SweepColumn::EddyUpper, SweepColumn::EddyLower, SweepColumn::CoreUpper, SweepColumn::CoreLower}) {
            worst_p = std::max(worst_p, std::abs(a.get(c) - b.get(c)));
        }
        for (SweepColumn c : {SweepColumn::MaxMrtEddy, SweepColumn::MaxMrtCore}) {
            worst_t = std::max(worst_t, std::abs(a.get(c) - b.get(c)) / b.get(c));
        }
        rows.push_back({{"default", row_json(a)}, {"refined", row_json(b)}});
    }
    v.detail = {{"mms_order", order}, {"max_probability_change", worst_p}, {"max_relative_mrt_change", worst_t}, {"rows", rows}};
    v.pass = order >= kMmsOrder && worst_p < kSweepStability && worst_t < kSweepStability;
    v.summary = "MMS L2 order " + fmt(order, 3) + "; finest-mesh change: probabilities " + sci(worst_p) + ", max MRT (relative) " + sci(worst_t);
    return v;
}

struct ProbeLine {
    std::vector<double> values;
};

// Field samples along vertical lines from the lower to the upper boundary.
std::vector<ProbeLine> vertical_probes(const ScalarField& f, const DomainSpec& d, int columns, int samples) {
    std::vector<ProbeLine> out;
    for (int c = 0; c < columns; ++c) {
        const double x = d.x_left + (0.1 + 0.8 * c / (columns - 1)) * d.period();
        const double lo = *d.boundary_y(BoundaryMarker::GammaLower, x);
        const double hi = *d.boundary_y(BoundaryMarker::GammaUpper, x);
        ProbeLine line;
        for (int i = 1; i < samples; ++i) {
            const auto v = interpolate(f, {x, lo + (hi - lo) * i / samples});
            if (v) line.values.push_back(*v);
        }
        out.push_back(std::move(line));
    }
    return out;
}

Verdict criterion_figures(const fs::path& out) {
    Verdict v;
    v.id = 9;
    const auto p = make_params(1.0 / 3.0);
    const ExitSettings s;
    const Resolution res;
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
        const DomainSpec d = k == 0 ? build_eddy_domain(p, s.trace_step) : build_jet_core_domain(p, JetPhase::Trough, s.trace_step);
        const std::string name = k == 0 ? "eddy" : "core";
        const auto mesh = build_mesh(d, res);
        const auto pair = solve_escape_pair(p, mesh, s);
        const auto mrt = solve_mrt(p, mesh, s);
        SvgOptions o;
        o.title = name + " escape through upper boundary, beta = 1/3";
        write_text(out / (name + "_escape_upper.svg"), contour_svg(pair.upper.field, d, o));
        o.title = name + " escape through lower boundary, beta = 1/3";
        write_text(out / (name + "_escape_lower.svg"), contour_svg(pair.lower.field, d, o));
        o.title = name + " mean residence time, beta = 1/3";
        write_text(out / (name + "_mrt.svg"), contour_svg(mrt, d, o));

        // Escape through the upper boundary rises toward it, through the
        // lower boundary rises toward that one.
        double worst_drop = 0.0;
        std::size_t samples = 0;
        for (const auto& line : vertical_probes(pair.upper.field, d, 9, 80)) {
            samples += line.values.size();
            for (std::size_t i = 1; i < line.values.size(); ++i) worst_drop = std::max(worst_drop, line.values[i - 1] - line.values[i]);
        }
        for (const auto& line : vertical_probes(pair.lower.field, d, 9, 80)) {
            for (std::size_t i = 1; i < line.values.size(); ++i) worst_drop = std::max(worst_drop, line.values[i] - line.values[i - 1]);
        }
        // Residence time: a single interior maximum on every probe line and
        // a global maximum away from the boundary.
        const auto ext = field_extremum(mrt);
        double worst_mrt = 0.0;
        for (const auto& line : vertical_probes(mrt, d, 9, 80)) {
            const auto peak = std::max_element(line.values.begin(), line.values.end()) - line.values.begin();
            for (long i = 1; i <= peak; ++i) worst_mrt = std::max(worst_mrt, line.values[i - 1] - line.values[i]);
            for (std::size_t i = static_cast<std::size_t>(peak) + 1; i < line.values.size(); ++i) {
                worst_mrt = std::max(worst_mrt, line.values[i] - line.values[i - 1]);
            }
        }
        const double rel_mrt = worst_mrt / ext.value;
        const bool interior = mesh->markers[ext.vertex] == BoundaryMarker::Interior && d.signed_gap(ext.location) > 0.0;
        // Every probe point lies inside the mesh unless the mesh misses the domain.
        const bool covered = samples == 9u * 79u;
        const bool part = covered && worst_drop <= kMonotoneSlack && rel_mrt <= kMonotoneSlack && interior;
        ok = ok && part;
        v.detail[name] = {{"escape_worst_reversal", worst_drop}, {"mrt_worst_relative_reversal", rel_mrt},
                          {"mrt_max", ext.value}, {"mrt_max_location", {ext.location.x, ext.location.y}},
                          {"mrt_max_interior", interior}, {"escape_samples", samples}};
        v.notes.push_back(name + ": " + std::to_string(samples) + " samples, escape reversal " + sci(worst_drop) + ", MRT reversal (relative) " + sci(rel_mrt) +
                          ", MRT max " + fmt(ext.value, 2) + (interior ? " interior" : " ON BOUNDARY"));
    }
    v.pass = ok;
    v.summary = "monotone escape layering and single interior MRT maximum on 9 vertical probe lines per domain; SVGs written";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(out);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Verdict> verdicts;
    try {
        std::cerr << "running beta sweep at default resolution..." << std::endl;
        const SweepResult sw = run_sweep(Resolution{}, ExitSettings{});
        std::cerr << "  " << sw.table.rows.size() << " rows in " << fmt(sw.seconds, 1) << " s" << std::endl;
        {
            std::ostringstream csv;
            write_sweep_csv(csv, sw.table);
            write_text(out / "sweep.csv", csv.str());
            std::vector<double> beta;
            std::vector<double> eu, el, cu, cl, me, mc;
            for (const SweepRow& r : sw.table.rows) {
                beta.push_back(r.beta);
                eu.push_back(r.p_eddy_upper);
                el.push_back(r.p_eddy_lower);
                cu.push_back(r.p_core_upper);
                cl.push_back(r.p_core_lower);
                me.push_back(r.max_mrt_eddy);
                mc.push_back(r.max_mrt_core);
            }
            write_text(out / "eddy_escape.svg", line_plot_svg("eddy average escape probability", "beta", beta,
                                                              {{"into jet core", eu, false}, {"into exterior", el, true}}));
            write_text(out / "core_escape.svg", line_plot_svg("jet-core average escape probability", "beta", beta,
                                                              {{"north", cu, false}, {"south", cl, true}}));
            write_text(out / "mrt_eddy.svg", line_plot_svg("eddy max residence time", "beta", beta, {{"eddy", me, false}}));
            write_text(out / "mrt_core.svg", line_plot_svg("jet-core max residence time", "beta", beta, {{"core", mc, false}}));
        }
        verdicts.push_back(criterion_eddy_crossing(sw));
        verdicts.push_back(criterion_eddy_peak(sw));
        verdicts.push_back(criterion_core_band(sw));
        verdicts.push_back(criterion_mrt(sw));
        verdicts.push_back(criterion_analytic());
        verdicts.push_back(criterion_complement(sw));
        std::cerr << "running Monte Carlo cross-validation..." << std::endl;
        verdicts.push_back(criterion_mc(out));
        verdicts.push_back(criterion_convergence());
        verdicts.push_back(criterion_figures(out));
    } catch (const std::exception& e) {
        std::cout << "acceptance run aborted: " << e.what() << std::endl;
        return 2;
    }

    json report = json::array();
    bool all = true;
    for (const Verdict& v : verdicts) {
        std::cout << "CRITERION " << v.id << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.summary << '\n';
        for (const auto& n : v.notes) std::cout << "    " << n << '\n';
        report.push_back({{"criterion", v.id}, {"pass", v.pass}, {"summary", v.summary}, {"detail", v.detail}});
        all = all && v.pass;
    }
    write_text(out / "acceptance_report.json", report.dump(2));
    std::cout << "total " << fmt(seconds_since(t0), 0) << " s, report in " << (out / "acceptance_report.json").string() << std::endl;
    return all ? 0 : 1;
}
