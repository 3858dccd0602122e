// Command-line front end: escape-probability and residence-time solves,
// beta sweeps, Monte Carlo cross-validation and mesh export.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jetexit/error.hpp"
#include "jetexit/exitproblem.hpp"
#include "jetexit/io.hpp"
#include "jetexit/mc_oracle.hpp"
#include "jetexit/validation.hpp"

namespace fs = std::filesystem;
using namespace jetexit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCollision = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitValidation = 5;

constexpr const char* kVersion = "jetexit 1.0.0";

struct OutputCollision : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    double beta = 1.0 / 3.0;
    std::vector<double> betas;
    std::string domain = "eddy";
    std::string gamma = "lower";
    std::string phase = "trough";
    Resolution resolution;
    bool no_stabilization = false;
    double diffusion = 0.0;  // 0: epsilon
    SolverOptions solver;
    std::string output;
    bool force = false;
    bool dry_run = false;
    std::uint64_t seed = 1;
    double dt = 0.0;  // 0: per-domain default
    std::size_t paths = 10000;
    std::size_t probes = 10;
    bool coarse = false;
    bool refine = false;
    double radius = 0.5;

    ExitSettings settings() const {
        ExitSettings s;
        s.stabilization = no_stabilization ? Stabilization::None : Stabilization::StreamlineDiffusion;
        if (diffusion > 0.0) s.diffusion = diffusion;
        s.solver = solver;
        return s;
    }

    Resolution effective_resolution() const {
        if (!coarse) return resolution;
        Resolution r;
        r.eddy_radial = 4;
        r.eddy_angular = 16;
        r.core_x = 8;
        r.core_y = 4;
        return r;
    }
};

json to_json(const RunConfig& c) {
    json j{{"command", c.command},
           {"version", kVersion},
           {"resolution", jetexit::to_json(c.effective_resolution())},
           {"stabilization", !c.no_stabilization},
           {"diffusion", c.diffusion > 0.0 ? json(c.diffusion) : json("epsilon")},
           {"solver", jetexit::to_json(c.solver)},
           {"output", c.output}};
    if (c.command == "sweep") {
        j["betas"] = c.betas;
        j["phase"] = c.phase;
        j["refine"] = c.refine;
    } else if (c.command == "disk-selftest") {
        j["radius"] = c.radius;
    } else {
        j["beta"] = c.beta;
        j["domain"] = c.domain;
        j["phase"] = c.phase;
    }
    if (c.command == "solve-escape") j["gamma"] = c.gamma;
    if (c.command == "mc-validate") {
        j["seed"] = c.seed;
        j["dt"] = c.dt > 0.0 ? json(c.dt) : json("default");
        j["paths"] = c.paths;
        j["probes"] = c.probes;
        j["coarse"] = c.coarse;
    }
    j["config_hash"] = fnv1a_hex(j.dump());
    return j;
}

void prepare_output(const RunConfig& c) {
    const fs::path dir(c.output);
    if (fs::exists(dir) && !fs::is_directory(dir)) {
        throw OutputCollision("output path exists and is not a directory: " + c.output);
    }
    if (fs::exists(dir) && !fs::is_empty(dir) && !c.force) {
        throw OutputCollision("output directory is not empty (use --force): " + c.output);
    }
    fs::create_directories(dir);
    write_text(dir / "config.json", to_json(c).dump(2) + "\n");
}

fs::path out_path(const RunConfig& c, const std::string& name) {
    return fs::path(c.output) / name;
}

DomainSpec make_domain(const RunConfig& c, const JetParameters& p) {
    return domain_kind_from_string(c.domain) == DomainKind::Eddy
               ? build_eddy_domain(p)
               : build_jet_core_domain(p, phase_from_string(c.phase));
}

void write_field(const RunConfig& c, const ScalarField& f, const DomainSpec& d, const std::string& stem,
                 const std::string& title, json meta) {
    std::ostringstream csv;
    write_field_csv(csv, f);
    write_text(out_path(c, stem + ".csv"), csv.str());
    meta["field"] = field_metadata(f);
    meta["config"] = to_json(c);
    write_text(out_path(c, stem + ".json"), meta.dump(2) + "\n");
    SvgOptions so;
    so.title = title;
    write_text(out_path(c, stem + ".svg"), contour_svg(f, d, so));
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

int cmd_solve_escape(const RunConfig& c) {
    const JetParameters p = make_params(c.beta);
    const BoundaryMarker gamma = marker_from_string(c.gamma);
    const DomainSpec d = make_domain(c, p);
    prepare_output(c);
    const ExitSolution sol = solve_escape(p, d, gamma, c.effective_resolution(), c.settings());
    json meta{{"average", sol.average}, {"gamma", to_string(gamma)}, {"warnings", sol.warnings},
              {"domain_area", d.area}};
    write_text(out_path(c, "domain.json"), jetexit::to_json(d).dump(2) + "\n");
    write_field(c, sol.field, d, "escape",
                "Escape probability, " + c.domain + ", " + to_string(gamma) + ", beta = " + fixed(c.beta, 4), meta);
    for (const std::string& w : sol.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "P = " << fixed(sol.average, 6) << '\n';
    return kExitOk;
}

int cmd_solve_mrt(const RunConfig& c) {
    const JetParameters p = make_params(c.beta);
    const DomainSpec d = make_domain(c, p);
    prepare_output(c);
    const ScalarField f = solve_mrt(p, d, c.effective_resolution(), c.settings());
    const Extremum e = field_extremum(f);
    json meta{{"max", e.value}, {"max_location", {e.location.x, e.location.y}}, {"domain_area", d.area}};
    write_text(out_path(c, "domain.json"), jetexit::to_json(d).dump(2) + "\n");
    write_field(c, f, d, "mrt", "Mean residence time, " + c.domain + ", beta = " + fixed(c.beta, 4), meta);
    std::cout << "max MRT = " << fixed(e.value, 4) << " at (" << fixed(e.location.x, 4) << ", "
              << fixed(e.location.y, 4) << ")\n";
    return kExitOk;
}

// Half the spacing of the populated rows bracketing `beta`.
double grid_uncertainty(const SweepTable& t, double beta) {
    double below = -1.0, above = 10.0;
    for (const SweepRow& r : t.rows) {
        if (!r.ok) continue;
        if (r.beta <= beta) below = std::max(below, r.beta);
        if (r.beta >= beta) above = std::min(above, r.beta);
    }
    if (below < 0.0 || above > 1.0) return NAN;
    return 0.5 * (above - below);
}

struct Features {
    json report = json::object();
    std::vector<double> locations;
};

Features detect_features(const SweepTable& t) {
    Features f;
    auto crossing = [&](const std::string& name, SweepColumn a, SweepColumn b, double lo, double hi) {
        try {
            const double x = find_crossing(t, a, b, lo, hi);
            f.report[name] = {{"beta", x}, {"uncertainty", grid_uncertainty(t, x)}};
            f.locations.push_back(x);
            std::cout << name << ": beta = " << fixed(x, 4) << " +- " << fixed(grid_uncertainty(t, x), 4) << '\n';
        } catch (const Error& e) {
            f.report[name] = {{"error", e.what()}};
            std::cout << name << ": not found (" << e.what() << ")\n";
        }
    };
    auto extremum = [&](const std::string& name, SweepColumn col) {
        try {
            const double x = find_extremum(t, col);
            f.report[name] = {{"beta", x}, {"uncertainty", grid_uncertainty(t, x)}};
            f.locations.push_back(x);
            std::cout << name << ": beta = " << fixed(x, 4) << " +- " << fixed(grid_uncertainty(t, x), 4) << '\n';
        } catch (const Error& e) {
            f.report[name] = {{"error", e.what()}};
            std::cout << name << ": not found (" << e.what() << ")\n";
        }
    };
    crossing("eddy_crossing", SweepColumn::EddyLower, SweepColumn::EddyUpper, -1.0, 2.0);
    crossing("core_crossing_low", SweepColumn::CoreUpper, SweepColumn::CoreLower, 0.0, 0.25);
    crossing("core_crossing_high", SweepColumn::CoreUpper, SweepColumn::CoreLower, 0.25, kBetaMax);
    extremum("eddy_lower_maximum", SweepColumn::EddyLower);
    extremum("eddy_mrt_maximum", SweepColumn::MaxMrtEddy);
    const MonotonicityVerdict v = monotonicity_check(t, SweepColumn::MaxMrtCore);
    const std::string trend = v.trend == Trend::Increasing ? "increasing"
                              : v.trend == Trend::Decreasing ? "decreasing"
                                                             : "neither";
    f.report["core_mrt_trend"] = trend;
    std::cout << "core max-MRT trend: " << trend << '\n';
    return f;
}

int cmd_sweep(const RunConfig& c) {
    const ExitSettings s = c.settings();
    const Resolution r = c.effective_resolution();
    const JetPhase phase = phase_from_string(c.phase);
    prepare_output(c);
    auto progress = [](const SweepRow& row) {
        std::cout << "beta " << fixed(row.beta, 4) << (row.ok ? " ok" : " FAILED: " + row.error) << std::endl;
    };
    SweepTable t = sweep_beta(c.betas, r, phase, s, progress);
    std::vector<double> grid = c.betas;
    if (c.refine) {
        std::vector<double> features;
        {
            std::ostringstream sink;
            auto* old = std::cout.rdbuf(sink.rdbuf());
            features = detect_features(t).locations;
            std::cout.rdbuf(old);
        }
        const std::vector<double> refined = refine_grid(c.betas, features);
        std::vector<double> extra;
        for (double b : refined) {
            const bool present = std::any_of(t.rows.begin(), t.rows.end(),
                                             [&](const SweepRow& q) { return std::abs(q.beta - b) < 1e-12; });
            if (!present) extra.push_back(b);
        }
        if (!extra.empty()) merge_rows(t, sweep_beta(extra, r, phase, s, progress));
        grid = refined;
    }
    std::ostringstream csv;
    write_sweep_csv(csv, t);
    write_text(out_path(c, "sweep.csv"), csv.str());

    std::vector<double> xs;
    std::vector<double> cols[6];
    for (const SweepRow& row : t.rows) {
        xs.push_back(row.beta);
        for (int k = 0; k < 6; ++k) cols[k].push_back(row.ok ? row.get(static_cast<SweepColumn>(k)) : NAN);
    }
    using C = SweepColumn;
    auto col = [&](C k) { return cols[static_cast<int>(k)]; };
    write_text(out_path(c, "eddy_escape.svg"),
               line_plot_svg("Average escape probability, eddy", "beta",
                             xs, {{"exterior retrograde", col(C::EddyLower), false}, {"jet core", col(C::EddyUpper), true}}));
    write_text(out_path(c, "core_escape.svg"),
               line_plot_svg("Average escape probability, unit jet core (" + c.phase + ")", "beta", xs,
                             {{"northern recirculating", col(C::CoreUpper), false},
                              {"southern recirculating", col(C::CoreLower), true}}));
    write_text(out_path(c, "mrt_eddy.svg"),
               line_plot_svg("Maximal mean residence time, eddy", "beta", xs, {{"max MRT", col(C::MaxMrtEddy), false}}));
    write_text(out_path(c, "mrt_core.svg"),
               line_plot_svg("Maximal mean residence time, unit jet core", "beta", xs,
                             {{"max MRT", col(C::MaxMrtCore), false}}));

    const Features f = detect_features(t);
    json meta = sweep_metadata(t, grid, r, s);
    meta["features"] = f.report;
    meta["config"] = to_json(c);
    write_text(out_path(c, "sweep.json"), meta.dump(2) + "\n");
    const bool all_ok = std::all_of(t.rows.begin(), t.rows.end(), [](const SweepRow& q) { return q.ok; });
    if (!all_ok) std::cerr << "some sweep rows failed; see sweep.csv\n";
    return all_ok ? kExitOk : kExitNumerical;
}

int cmd_mc_validate(const RunConfig& c) {
    const JetParameters p = make_params(c.beta);
    const DomainSpec d = make_domain(c, p);
    prepare_output(c);
    const auto mesh = build_mesh(d, c.effective_resolution());
    ValidationOptions o;
    o.n_probes = c.probes;
    o.mc.n_paths = c.paths;
    o.mc.seed = c.seed;
    o.mc.dt = c.dt > 0.0 ? c.dt : default_mc_dt(d.kind);
    const auto t0 = std::chrono::steady_clock::now();
    const CrossValidation cv = cross_validate(p, d, mesh, c.settings(), o);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json probes = json::array();
    for (const ProbeComparison& q : cv.probes) {
        probes.push_back({{"point", {q.point.x, q.point.y}},
                          {"fem_escape_upper", q.fem_escape_upper},
                          {"fem_mrt", q.fem_mrt},
                          {"mc", jetexit::to_json(q.mc)},
                          {"z_escape", q.z_escape},
                          {"z_time", q.z_time},
                          {"pass", q.pass}});
        std::cout << "probe (" << fixed(q.point.x, 4) << ", " << fixed(q.point.y, 4) << ")  P fem "
                  << fixed(q.fem_escape_upper, 4) << " mc " << fixed(q.mc.fraction(BoundaryMarker::GammaUpper), 4)
                  << " z " << fixed(q.z_escape, 2) << "  T fem " << fixed(q.fem_mrt, 3) << " mc "
                  << fixed(q.mc.mean_exit_time, 3) << " z " << fixed(q.z_time, 2) << (q.pass ? "  ok" : "  DISAGREE")
                  << '\n';
    }
    json study = json::array();
    for (const DtStudyRow& row : cv.dt_study.rows) {
        study.push_back({{"dt", row.dt}, {"stats", jetexit::to_json(row.stats)},
                         {"agrees_with_previous", row.agrees_with_previous}});
    }
    json report{{"pass", cv.pass},
                {"probes", probes},
                {"dt_study", {{"rows", study}, {"converged", cv.dt_study.converged}}},
                {"seconds", seconds},
                {"config", to_json(c)}};
    write_text(out_path(c, "validation.json"), report.dump(2) + "\n");
    std::cout << "dt study " << (cv.dt_study.converged ? "converged" : "NOT converged") << '\n';
    std::cout << (cv.pass ? "PASS" : "FAIL") << ": " << cv.probes.size() << " probes within 3 standard errors"
              << (cv.pass ? "" : " (some disagree)") << '\n';
    return cv.pass ? kExitOk : kExitValidation;
}

int cmd_mesh_export(const RunConfig& c) {
    const JetParameters p = make_params(c.beta);
    const DomainSpec d = make_domain(c, p);
    prepare_output(c);
    const auto mesh = build_mesh(d, c.effective_resolution());
    const MeshQuality q = mesh_quality(*mesh);
    write_text(out_path(c, "domain.json"), jetexit::to_json(d).dump(2) + "\n");
    write_text(out_path(c, "mesh.json"), jetexit::to_json(*mesh).dump() + "\n");
    std::ostringstream txt;
    write_mesh_text(txt, *mesh);
    write_text(out_path(c, "mesh.txt"), txt.str());
    std::cout << mesh->vertex_count() << " vertices, " << mesh->triangle_count() << " triangles, min angle "
              << fixed(q.min_angle_deg, 2) << " deg, h_max " << fixed(q.h_max, 5) << '\n';
    return kExitOk;
}

int cmd_disk_selftest(const RunConfig& c) {
    const JetParameters p = make_params(1.0 / 3.0);
    const DomainSpec d = make_disk_domain({0.0, 0.0}, c.radius);
    prepare_output(c);
    ExitSettings s = c.settings();
    s.drift_override = zero_drift();
    const double diffusion = s.diffusion_for(p);
    Resolution r = c.effective_resolution();
    const auto mesh = build_mesh(d, r);
    const ScalarField f = solve_mrt(p, mesh, s);
    const double fem = f.values.front();
    const double exact = c.radius * c.radius / (4.0 * diffusion);
    const double rel = std::abs(fem - exact) / exact;
    write_text(out_path(c, "disk.json"),
               json{{"fem_center", fem}, {"analytic", exact}, {"relative_error", rel}, {"config", to_json(c)}}.dump(2) +
                   "\n");
    std::cout << "disk MRT at center: FEM " << fixed(fem, 4) << ", analytic " << fixed(exact, 4)
              << ", relative error " << rel << (rel < 0.01 ? "  PASS" : "  FAIL") << '\n';
    return rel < 0.01 ? kExitOk : kExitValidation;
}

void error_report(const std::string& kind, const std::string& message, const std::string& output) {
    const json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
    if (!output.empty() && fs::is_directory(output)) {
        try {
            write_text(fs::path(output) / "error.json", j.dump(2) + "\n");
        } catch (const std::exception&) {
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Escape probabilities and mean residence times in a stochastic meandering jet"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunConfig c;
    auto common = [&c](CLI::App* sub) {
        sub->add_option("--output", c.output, "Output directory (default out/<command>)");
        sub->add_flag("--force", c.force, "Write into a non-empty output directory");
        sub->add_flag("--dry-run", c.dry_run, "Print the resolved configuration and exit");
        sub->add_flag("--no-stabilization", c.no_stabilization, "Plain Galerkin instead of streamline diffusion");
        sub->add_option("--diffusion", c.diffusion, "Diffusion coefficient (default epsilon)");
        sub->add_option("--eddy-radial", c.resolution.eddy_radial, "Eddy mesh rings")->capture_default_str();
        sub->add_option("--eddy-angular", c.resolution.eddy_angular, "Eddy mesh sectors (even)")->capture_default_str();
        sub->add_option("--core-x", c.resolution.core_x, "Jet-core mesh columns")->capture_default_str();
        sub->add_option("--core-y", c.resolution.core_y, "Jet-core mesh rows")->capture_default_str();
        sub->add_option("--refinements", c.resolution.refinements, "Uniform refinements")->capture_default_str();
        sub->add_option("--solver-tol", c.solver.tol, "Relative residual tolerance")->capture_default_str();
    };
    auto beta_domain = [&c](CLI::App* sub) {
        sub->add_option("--beta", c.beta, "Beta in (0, 2/3)")->required();
        sub->add_option("--domain", c.domain, "eddy | jet-core")->required()->check(CLI::IsMember({"eddy", "jet-core"}));
        sub->add_option("--phase", c.phase, "Jet-core cut: trough | crest")
            ->check(CLI::IsMember({"trough", "crest"}))
            ->capture_default_str();
    };

    auto* esc = app.add_subcommand("solve-escape", "Escape probability through one boundary");
    common(esc);
    beta_domain(esc);
    esc->add_option("--gamma", c.gamma, "upper | lower")->required()->check(CLI::IsMember({"upper", "lower"}));

    auto* mrt = app.add_subcommand("solve-mrt", "Mean residence time");
    common(mrt);
    beta_domain(mrt);

    auto* sweep = app.add_subcommand("sweep", "Sweep beta over both domains");
    common(sweep);
    sweep->add_option("--betas", c.betas, "Comma-separated beta grid (default: 28 points on [0.01, 0.65])")
        ->delimiter(',');
    sweep->add_option("--phase", c.phase, "Jet-core cut: trough | crest")
        ->check(CLI::IsMember({"trough", "crest"}))
        ->capture_default_str();
    sweep->add_flag("--refine", c.refine, "Add local grid points around detected crossings and extrema");

    auto* mc = app.add_subcommand("mc-validate", "Monte Carlo cross-check of FEM fields at probe points");
    common(mc);
    beta_domain(mc);
    mc->add_option("--seed", c.seed, "Master RNG seed")->capture_default_str();
    mc->add_option("--dt", c.dt, "Euler-Maruyama step (default per domain)");
    mc->add_option("--paths", c.paths, "Paths per probe")->capture_default_str();
    mc->add_option("--probes", c.probes, "Probe count (even)")->capture_default_str();
    mc->add_flag("--coarse", c.coarse, "Use a deliberately coarse FEM mesh");

    auto* mesh = app.add_subcommand("mesh-export", "Write domain and mesh files");
    common(mesh);
    beta_domain(mesh);

    auto* disk = app.add_subcommand("disk-selftest", "Pure-diffusion disk residence time against R^2 / (4 D)");
    common(disk);
    disk->add_option("--radius", c.radius, "Disk radius")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    c.command = chosen->get_name();
    if (c.command == "sweep" && c.betas.empty()) c.betas = default_sweep_grid();
    if (c.output.empty()) c.output = "out/" + c.command;
    if (c.command == "disk-selftest" && chosen->count("--refinements") == 0 && chosen->count("--eddy-radial") == 0 &&
        chosen->count("--eddy-angular") == 0) {
        c.resolution.eddy_radial = 8;
        c.resolution.eddy_angular = 32;
        c.resolution.refinements = 2;
    }

    try {
        if (c.command != "sweep" && c.command != "disk-selftest") make_params(c.beta);
        if (c.dry_run) {
            std::cout << to_json(c).dump(2) << '\n';
            return kExitOk;
        }
        if (c.command == "solve-escape") return cmd_solve_escape(c);
        if (c.command == "solve-mrt") return cmd_solve_mrt(c);
        if (c.command == "sweep") return cmd_sweep(c);
        if (c.command == "mc-validate") return cmd_mc_validate(c);
        if (c.command == "mesh-export") return cmd_mesh_export(c);
        if (c.command == "disk-selftest") return cmd_disk_selftest(c);
    } catch (const OutputCollision& e) {
        error_report("output_collision", e.what(), "");
        return kExitCollision;
    } catch (const ParameterError& e) {
        error_report("parameter", e.what(), c.output);
        return kExitUsage;
    } catch (const Error& e) {
        error_report("numerical", e.what(), c.output);
        return kExitNumerical;
    } catch (const std::exception& e) {
        error_report("io", e.what(), c.output);
        return kExitNumerical;
    }
    return kExitUsage;
}
