#include "jetexit/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jetexit/error.hpp"

namespace jetexit {

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), end);
}

BoundaryMarker marker_from_string(std::string_view s) {
    if (s == "interior") return BoundaryMarker::Interior;
    if (s == "gamma_upper" || s == "upper") return BoundaryMarker::GammaUpper;
    if (s == "gamma_lower" || s == "lower") return BoundaryMarker::GammaLower;
    if (s == "corner") return BoundaryMarker::Corner;
    throw ParameterError("marker", "unknown boundary marker '" + std::string(s) + "'");
}

DomainKind domain_kind_from_string(std::string_view s) {
    if (s == "eddy") return DomainKind::Eddy;
    if (s == "jet-core" || s == "jet_core") return DomainKind::JetCoreUnit;
    throw ParameterError("domain", "unknown domain kind '" + std::string(s) + "'");
}

JetPhase phase_from_string(std::string_view s) {
    if (s == "trough") return JetPhase::Trough;
    if (s == "crest") return JetPhase::Crest;
    throw ParameterError("phase", "unknown phase '" + std::string(s) + "'");
}

json to_json(const DomainSpec& d) {
    json j;
    j["kind"] = to_string(d.kind);
    j["beta"] = d.beta;
    j["phase"] = to_string(d.phase);
    j["area"] = d.area;
    j["center"] = {d.center.x, d.center.y};
    j["x_left"] = d.x_left;
    j["x_right"] = d.x_right;
    j["warnings"] = d.warnings;
    json segs = json::array();
    for (const BoundarySegment& s : d.segments) {
        json pts = json::array();
        for (const PhasePoint& q : s.curve.points) pts.push_back({q.x, q.y});
        segs.push_back({{"marker", to_string(s.marker)}, {"level", s.curve.level}, {"points", pts}});
    }
    j["segments"] = segs;
    return j;
}

DomainSpec domain_from_json(const json& j) {
    DomainSpec d;
    d.kind = domain_kind_from_string(j.at("kind").get<std::string>());
    d.beta = j.at("beta").get<double>();
    d.phase = phase_from_string(j.at("phase").get<std::string>());
    d.area = j.at("area").get<double>();
    d.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
    d.x_left = j.at("x_left").get<double>();
    d.x_right = j.at("x_right").get<double>();
    d.warnings = j.value("warnings", std::vector<std::string>{});
    for (const json& s : j.at("segments")) {
        BoundarySegment seg;
        seg.marker = marker_from_string(s.at("marker").get<std::string>());
        seg.curve.level = s.at("level").get<double>();
        for (const json& q : s.at("points")) seg.curve.points.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
        seg.curve.spline = CubicSpline2::fit(seg.curve.points, false);
        d.segments.push_back(std::move(seg));
    }
    return d;
}

json to_json(const TriangleMesh& m) {
    json j;
    json verts = json::array();
    for (const PhasePoint& q : m.vertices) verts.push_back({q.x, q.y});
    json markers = json::array();
    for (BoundaryMarker b : m.markers) markers.push_back(to_string(b));
    j["vertices"] = verts;
    j["triangles"] = m.triangles;
    j["markers"] = markers;
    j["periodic_pairs"] = m.periodic_pairs;
    j["h_max"] = m.h_max;
    if (m.domain) j["domain"] = to_json(*m.domain);
    return j;
}

TriangleMesh mesh_from_json(const json& j) {
    TriangleMesh m;
    for (const json& q : j.at("vertices")) m.vertices.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
    m.triangles = j.at("triangles").get<std::vector<Triangle>>();
    for (const json& b : j.at("markers")) m.markers.push_back(marker_from_string(b.get<std::string>()));
    m.periodic_pairs = j.at("periodic_pairs").get<std::vector<std::pair<std::size_t, std::size_t>>>();
    m.h_max = j.at("h_max").get<double>();
    if (j.contains("domain")) m.domain = std::make_shared<const DomainSpec>(domain_from_json(j.at("domain")));
    return m;
}

void write_mesh_text(std::ostream& os, const TriangleMesh& m) {
    os << m.vertex_count() << ' ' << m.triangle_count() << '\n';
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
        os << format_double(m.vertices[i].x) << ' ' << format_double(m.vertices[i].y) << ' '
           << to_string(m.markers[i]) << '\n';
    }
    for (const Triangle& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
    os << "x,y,marker,value\n";
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const PhasePoint q = f.mesh->vertices[i];
        os << format_double(q.x) << ',' << format_double(q.y) << ',' << to_string(f.mesh->markers[i]) << ','
           << format_double(f.values[i]) << '\n';
    }
}

json field_metadata(const ScalarField& f) {
    std::ostringstream csv;
    write_field_csv(csv, f);
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    return {{"meaning", to_string(f.meaning)},
            {"vertices", f.mesh->vertex_count()},
            {"triangles", f.mesh->triangle_count()},
            {"min", f.values.empty() ? 0.0 : *lo},
            {"max", f.values.empty() ? 0.0 : *hi},
            {"solver", {{"method", f.report.method},
                        {"iterations", f.report.iterations},
                        {"relative_residual", f.report.relative_residual}}},
            {"content_hash", fnv1a_hex(csv.str())}};
}

void write_sweep_csv(std::ostream& os, const SweepTable& t) {
    os << "beta,p_eddy_upper,p_eddy_lower,p_core_upper,p_core_lower,max_mrt_eddy,max_mrt_core,ok,error\n";
    for (const SweepRow& r : t.rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << format_double(r.beta);
        for (double v : {r.p_eddy_upper, r.p_eddy_lower, r.p_core_upper, r.p_core_lower, r.max_mrt_eddy, r.max_mrt_core}) {
            os << ',' << (r.ok ? format_double(v) : std::string());
        }
        os << ',' << (r.ok ? "true" : "false") << ',' << err << '\n';
    }
}

json to_json(const Resolution& r) {
    return {{"eddy_radial", r.eddy_radial}, {"eddy_angular", r.eddy_angular}, {"core_x", r.core_x},
            {"core_y", r.core_y}, {"refinements", r.refinements}};
}

json to_json(const SolverOptions& o) {
    return {{"tol", o.tol}, {"max_iter", o.max_iter}, {"restart", o.restart},
            {"direct_threshold", o.direct_threshold}};
}

json sweep_metadata(const SweepTable& t, const std::vector<double>& grid, const Resolution& r,
                    const ExitSettings& s) {
    json j;
    j["grid"] = grid;
    j["phase"] = to_string(t.phase);
    j["resolution"] = to_json(r);
    j["stabilization"] = to_string(s.stabilization);
    j["diffusion"] = s.diffusion ? json(*s.diffusion) : json("epsilon");
    j["solver"] = to_json(s.solver);
    j["trace_step"] = s.trace_step;
    json config = j;
    j["config_hash"] = fnv1a_hex(config.dump());
    std::ostringstream csv;
    write_sweep_csv(csv, t);
    j["table_hash"] = fnv1a_hex(csv.str());
    return j;
}

json to_json(const ExitStatistics& s) {
    json counts = json::object();
    json errs = json::object();
    for (const auto& [m, c] : s.exit_counts) counts[to_string(m)] = c;
    for (const auto& [m, e] : s.std_err_prob) errs[to_string(m)] = e;
    return {{"start", {s.start.x, s.start.y}},
            {"n_paths", s.n_paths},
            {"exit_counts", counts},
            {"mean_exit_time", s.mean_exit_time},
            {"std_err_time", s.std_err_time},
            {"std_err_prob", errs},
            {"rng_seed", s.rng_seed},
            {"dt", s.dt},
            {"diffusion", s.diffusion},
            {"censored", s.censored}};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

constexpr std::array<const char*, 10> kPalette = {"#30123b", "#4145ab", "#4675ed", "#39a2fc", "#1bcfd4",
                                                  "#24eca6", "#61fc6c", "#a4fc3b", "#f4c03a", "#e4460a"};

struct Frame {
    double x0, x1, y0, y1;
    double left = 60.0, top = 40.0, w, h;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * w; }
    double py(double y) const { return top + (y1 - y) / (y1 - y0) * h; }
};

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Vert {
    PhasePoint p;
    double f;
};

// Sutherland-Hodgman clip of a polygon with linear data against f >= level
// (keep_above) or f <= level.
std::vector<Vert> clip(const std::vector<Vert>& poly, double level, bool keep_above) {
    std::vector<Vert> out;
    const std::size_t n = poly.size();
    auto inside = [&](const Vert& v) { return keep_above ? v.f >= level : v.f <= level; };
    for (std::size_t i = 0; i < n; ++i) {
        const Vert& a = poly[i];
        const Vert& b = poly[(i + 1) % n];
        const bool ia = inside(a);
        const bool ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double t = (level - a.f) / (b.f - a.f);
            out.push_back({a.p + t * (b.p - a.p), level});
        }
    }
    return out;
}

void outline_path(std::ostringstream& svg, const DomainSpec& d, const Frame& fr) {
    const auto poly = d.outline();
    if (poly.empty()) return;
    svg << "<path d=\"";
    for (std::size_t i = 0; i < poly.size(); ++i) {
        svg << (i ? 'L' : 'M') << fmt2(fr.px(poly[i].x)) << ',' << fmt2(fr.py(poly[i].y));
    }
    svg << "Z\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
}

}  // namespace

std::string contour_svg(const ScalarField& f, const DomainSpec& d, const SvgOptions& o) {
    const TriangleMesh& m = *f.mesh;
    Frame fr{};
    fr.x0 = fr.x1 = m.vertices.front().x;
    fr.y0 = fr.y1 = m.vertices.front().y;
    for (const PhasePoint& q : m.vertices) {
        fr.x0 = std::min(fr.x0, q.x);
        fr.x1 = std::max(fr.x1, q.x);
        fr.y0 = std::min(fr.y0, q.y);
        fr.y1 = std::max(fr.y1, q.y);
    }
    fr.w = o.width - 160.0;
    fr.h = std::clamp(fr.w * (fr.y1 - fr.y0) / (fr.x1 - fr.x0), 240.0, 480.0);
    const double height = fr.h + 90.0;

    const auto [lo_it, hi_it] = std::minmax_element(f.values.begin(), f.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const int nl = std::max(1, o.levels);
    std::vector<double> edges(nl + 1);
    for (int i = 0; i <= nl; ++i) edges[i] = lo + (hi - lo) * i / nl;

    std::vector<std::ostringstream> bands(nl);
    for (const Triangle& t : m.triangles) {
        std::vector<Vert> tri;
        for (std::size_t v : t) tri.push_back({m.vertices[v], f.values[v]});
        const double fmin = std::min({tri[0].f, tri[1].f, tri[2].f});
        const double fmax = std::max({tri[0].f, tri[1].f, tri[2].f});
        for (int b = 0; b < nl; ++b) {
            if (fmax < edges[b] || fmin > edges[b + 1]) continue;
            std::vector<Vert> poly = tri;
            if (b > 0) poly = clip(poly, edges[b], true);
            if (b + 1 < nl && poly.size() >= 3) poly = clip(poly, edges[b + 1], false);
            if (poly.size() < 3) continue;
            for (std::size_t i = 0; i < poly.size(); ++i) {
                bands[b] << (i ? 'L' : 'M') << fmt2(fr.px(poly[i].p.x)) << ',' << fmt2(fr.py(poly[i].p.y));
            }
            bands[b] << 'Z';
        }
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << fmt2(height)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!o.title.empty()) svg << "<text x=\"" << fr.left << "\" y=\"24\" font-size=\"15\">" << o.title << "</text>\n";
    for (int b = 0; b < nl; ++b) {
        const std::string path = bands[b].str();
        if (path.empty()) continue;
        svg << "<path d=\"" << path << "\" fill=\"" << kPalette[static_cast<std::size_t>(b) % kPalette.size()]
            << "\" stroke=\"" << kPalette[static_cast<std::size_t>(b) % kPalette.size()]
            << "\" stroke-width=\"0.3\"/>\n";
    }
    outline_path(svg, d, fr);
    // Colour bar.
    const double bx = fr.left + fr.w + 25.0;
    for (int b = 0; b < nl; ++b) {
        const double y = fr.top + fr.h - (b + 1) * fr.h / nl;
        svg << "<rect x=\"" << fmt2(bx) << "\" y=\"" << fmt2(y) << "\" width=\"18\" height=\"" << fmt2(fr.h / nl)
            << "\" fill=\"" << kPalette[static_cast<std::size_t>(b) % kPalette.size()] << "\"/>\n";
    }
    for (int i = 0; i <= nl; ++i) {
        const double y = fr.top + fr.h - i * fr.h / nl;
        svg << "<text x=\"" << fmt2(bx + 22.0) << "\" y=\"" << fmt2(y + 4.0) << "\">" << fmt_label(edges[i])
            << "</text>\n";
    }
    svg << "<text x=\"" << fr.left << "\" y=\"" << fmt2(fr.top + fr.h + 20.0) << "\">x: " << fmt_label(fr.x0)
        << " .. " << fmt_label(fr.x1) << ", y: " << fmt_label(fr.y0) << " .. " << fmt_label(fr.y1)
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                          const std::vector<PlotSeries>& series) {
    Frame fr{};
    fr.w = 620.0;
    fr.h = 380.0;
    fr.left = 80.0;
    if (x.empty()) {
        fr.x0 = 0.0;
        fr.x1 = 1.0;
    } else {
        fr.x0 = x.front();
        fr.x1 = x.back() > x.front() ? x.back() : x.front() + 1.0;
    }
    fr.y0 = 1e300;
    fr.y1 = -1e300;
    for (const PlotSeries& s : series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            fr.y0 = std::min(fr.y0, v);
            fr.y1 = std::max(fr.y1, v);
        }
    }
    if (!(fr.y1 > fr.y0)) {
        fr.y0 = (fr.y0 < 1e299 ? fr.y0 : 0.0) - 0.5;
        fr.y1 = fr.y0 + 1.0;
    }
    const double pad = 0.05 * (fr.y1 - fr.y0);
    fr.y0 -= pad;
    fr.y1 += pad;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"480\" font-family=\"sans-serif\" "
           "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fr.left << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
    svg << "<rect x=\"" << fr.left << "\" y=\"" << fr.top << "\" width=\"" << fr.w << "\" height=\"" << fr.h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = fr.x0 + (fr.x1 - fr.x0) * i / 4.0;
        const double yv = fr.y0 + (fr.y1 - fr.y0) * i / 4.0;
        svg << "<text x=\"" << fmt2(fr.px(xv) - 12.0) << "\" y=\"" << fmt2(fr.top + fr.h + 16.0) << "\">"
            << fmt_label(xv) << "</text>\n";
        svg << "<text x=\"" << fmt2(fr.left - 70.0) << "\" y=\"" << fmt2(fr.py(yv) + 4.0) << "\">" << fmt_label(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << fmt2(fr.left + fr.w / 2.0) << "\" y=\"" << fmt2(fr.top + fr.h + 34.0) << "\">" << x_label
        << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const PlotSeries& s = series[k];
        svg << "<path d=\"";
        bool pen = false;
        for (std::size_t i = 0; i < x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                pen = false;
                continue;
            }
            svg << (pen ? 'L' : 'M') << fmt2(fr.px(x[i])) << ',' << fmt2(fr.py(s.y[i]));
            pen = true;
        }
        svg << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        const double ly = fr.top + 18.0 + 18.0 * static_cast<double>(k);
        svg << "<line x1=\"" << fmt2(fr.left + fr.w + 10.0) << "\" y1=\"" << fmt2(ly) << "\" x2=\""
            << fmt2(fr.left + fr.w + 40.0) << "\" y2=\"" << fmt2(ly) << "\" stroke=\"black\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        svg << "<text x=\"" << fmt2(fr.left + fr.w + 44.0) << "\" y=\"" << fmt2(ly + 4.0) << "\">" << s.name
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace jetexit
