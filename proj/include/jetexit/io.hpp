#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jetexit/exitproblem.hpp"
#include "jetexit/fem.hpp"
#include "jetexit/geometry.hpp"
#include "jetexit/mc_oracle.hpp"
#include "jetexit/mesh.hpp"

namespace jetexit {

using json = nlohmann::json;

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Shortest round-trip decimal form.
std::string format_double(double v);

BoundaryMarker marker_from_string(std::string_view s);
DomainKind domain_kind_from_string(std::string_view s);
JetPhase phase_from_string(std::string_view s);

json to_json(const DomainSpec& d);
/// Splines are refit from the stored boundary points.
DomainSpec domain_from_json(const json& j);

json to_json(const TriangleMesh& m);
TriangleMesh mesh_from_json(const json& j);
/// Plain text: vertex and triangle counts, "x y marker" lines, "i j k" lines.
void write_mesh_text(std::ostream& os, const TriangleMesh& m);

/// Header x,y,marker,value; one row per vertex.
void write_field_csv(std::ostream& os, const ScalarField& f);
json field_metadata(const ScalarField& f);

/// Header row naming every column, then one row per sweep beta.
void write_sweep_csv(std::ostream& os, const SweepTable& t);
json sweep_metadata(const SweepTable& t, const std::vector<double>& grid, const Resolution& r,
                    const ExitSettings& s);

json to_json(const ExitStatistics& s);
json to_json(const Resolution& r);
json to_json(const SolverOptions& o);

/// Writes text to a file, throwing std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);

struct SvgOptions {
    int width = 900;
    int levels = 10;
    std::string title;
};

/// Filled contour plot of a P1 field (fixed number of equal-width bands
/// between the field minimum and maximum) with the domain outline.
std::string contour_svg(const ScalarField& f, const DomainSpec& d, const SvgOptions& o = {});

struct PlotSeries {
    std::string name;
    std::vector<double> y;
    bool dashed = false;
};

/// Line plot of several series over a shared x grid.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::vector<double>& x, const std::vector<PlotSeries>& series);

}  // namespace jetexit
