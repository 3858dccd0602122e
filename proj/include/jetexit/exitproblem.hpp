#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jetexit/fem.hpp"
#include "jetexit/geometry.hpp"
#include "jetexit/mesh.hpp"

namespace jetexit {

/// Mesh resolution for both domain kinds plus extra uniform refinements.
struct Resolution {
    int eddy_radial = 48;
    int eddy_angular = 192;
    int core_x = 128;
    int core_y = 48;
    int refinements = 0;
};

struct ExitSettings {
    Stabilization stabilization = Stabilization::StreamlineDiffusion;
    /// Diffusion coefficient; defaults to epsilon.
    std::optional<double> diffusion;
    SolverOptions solver;
    /// Replaces the jet drift (test hook for pure-diffusion problems).
    std::optional<DriftField> drift_override;
    /// Tracing step for domain construction.
    double trace_step = 1e-3;

    double diffusion_for(const JetParameters& p) const { return diffusion.value_or(p.epsilon()); }
    DriftField drift_for(const JetParameters& p) const {
        return drift_override ? *drift_override : jet_drift(p);
    }
};

std::shared_ptr<const TriangleMesh> build_mesh(const DomainSpec& d, const Resolution& r);

struct ExitSolution {
    std::shared_ptr<const DomainSpec> domain;
    BoundaryMarker gamma = BoundaryMarker::GammaUpper;
    ScalarField field;
    /// Area average of the escape probability over the domain.
    double average = 0.0;
    std::vector<std::string> warnings;
};

/// Escape probability through `gamma` (1 on gamma, 0 on the other marker,
/// 1/2 at eddy corners), homogeneous operator with diffusion from settings.
ExitSolution solve_escape(const JetParameters& p, const DomainSpec& d, BoundaryMarker gamma,
                          const Resolution& r, const ExitSettings& s = {});
ExitSolution solve_escape(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                          BoundaryMarker gamma, const ExitSettings& s = {});

struct EscapePair {
    ExitSolution upper;
    ExitSolution lower;
};

/// Both escape problems from one factorization.
EscapePair solve_escape_pair(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                             const ExitSettings& s = {});

/// Mean residence time: rhs -1, zero on the whole boundary.
ScalarField solve_mrt(const JetParameters& p, const DomainSpec& d, const Resolution& r,
                      const ExitSettings& s = {});
ScalarField solve_mrt(const JetParameters& p, std::shared_ptr<const TriangleMesh> mesh,
                      const ExitSettings& s = {});

enum class SweepColumn {
    EddyUpper,   ///< eddy, escape into the jet core
    EddyLower,   ///< eddy, escape into the exterior retrograde region
    CoreUpper,   ///< jet core, escape into the northern recirculating region
    CoreLower,   ///< jet core, escape into the southern recirculating region
    MaxMrtEddy,
    MaxMrtCore,
};

std::string to_string(SweepColumn c);

struct SweepRow {
    double beta = 0.0;
    double p_eddy_upper = 0.0;
    double p_eddy_lower = 0.0;
    double p_core_upper = 0.0;
    double p_core_lower = 0.0;
    double max_mrt_eddy = 0.0;
    double max_mrt_core = 0.0;
    bool ok = true;
    std::string error;

    double get(SweepColumn c) const;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    JetPhase phase = JetPhase::Trough;
};

/// `betas` strictly increasing inside [0, 2/3]; values are clipped to
/// [1e-3, 2/3 - 1e-3]. A failing beta yields a row with ok = false.
SweepTable sweep_beta(const std::vector<double>& betas, const Resolution& r, JetPhase phase,
                      const ExitSettings& s = {},
                      const std::function<void(const SweepRow&)>& progress = {});

/// Builds one sweep row.
SweepRow sweep_row(double beta, const Resolution& r, JetPhase phase, const ExitSettings& s);

/// Adds beta values at +-step, +-2 step around `features`, keeping the grid
/// strictly increasing and deduplicated at step / 4.
std::vector<double> refine_grid(const std::vector<double>& betas, const std::vector<double>& features,
                                double step = 0.01);

/// Merges rows of `extra` into `table`, keeping beta strictly increasing.
void merge_rows(SweepTable& table, const SweepTable& extra);

/// Beta where col_a - col_b changes sign: monotone (PCHIP) interpolation of
/// the difference, then bisection. Throws CrossingStructureError unless the
/// difference changes sign exactly once over the populated rows.
double find_crossing(const SweepTable& t, SweepColumn col_a, SweepColumn col_b);

/// Same, restricted to rows with beta in [beta_min, beta_max].
double find_crossing(const SweepTable& t, SweepColumn col_a, SweepColumn col_b, double beta_min,
                     double beta_max);

/// Beta of the interior maximum of a unimodal column, refined by a parabola
/// through the discrete maximum and its neighbours. Throws
/// ExtremumStructureError for non-unimodal columns or a boundary maximum.
double find_extremum(const SweepTable& t, SweepColumn col);

enum class Trend { Increasing, Decreasing, Neither };

struct MonotonicityVerdict {
    Trend trend = Trend::Neither;
    /// First adjacent row pair that breaks the majority direction.
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;
    /// Row pairs with equal values.
    std::vector<std::pair<std::size_t, std::size_t>> ties;
};

MonotonicityVerdict monotonicity_check(const SweepTable& t, SweepColumn col);

/// Default 28-point grid on [0.01, 0.65].
std::vector<double> default_sweep_grid();

}  // namespace jetexit
