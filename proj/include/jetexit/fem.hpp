#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jetexit/flowfield.hpp"
#include "jetexit/mesh.hpp"
#include "jetexit/sparse.hpp"

namespace jetexit {

enum class Stabilization { None, StreamlineDiffusion };
enum class FieldMeaning { EscapeProbability, ResidenceTime, Generic };

std::string to_string(Stabilization s);
std::string to_string(FieldMeaning m);

/// Discrete system for diffusion * Lap(phi) + a . grad(phi) = rhs on a mesh.
/// Before apply_periodic every vertex is its own dof.
struct LinearSystem {
    std::shared_ptr<const TriangleMesh> mesh;
    CsrMatrix matrix;
    std::vector<double> rhs;
    /// vertex -> dof
    std::vector<std::size_t> dof_of_vertex;
    std::size_t dof_count = 0;
    /// Per dof: constrained flag and prescribed value.
    std::vector<char> constrained;
    std::vector<double> constrained_value;
    bool periodic_applied = false;
};

struct SolveReport {
    std::string method;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Nodal values on a mesh.
struct ScalarField {
    std::shared_ptr<const TriangleMesh> mesh;
    std::vector<double> values;
    FieldMeaning meaning = FieldMeaning::Generic;
    SolveReport report;
};

using SourceFunction = std::function<double(PhasePoint)>;

/// Galerkin P1 discretization of diffusion * Lap(phi) + a . grad(phi) = f.
/// The stored equations are the weak form of -diffusion * Lap(phi) - a . grad(phi) = -f,
/// with drift evaluated at the three edge midpoints. StreamlineDiffusion adds
/// the consistent SUPG term with tau = h_T / (2 |a|) * (coth(Pe) - 1 / Pe),
/// Pe = |a| h_T / (2 diffusion), h_T the element length along the flow.
/// Throws ParameterError for nonpositive diffusion.
LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const DriftField& drift,
                      double diffusion, const SourceFunction& rhs, Stabilization stabilization);

LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const DriftField& drift,
                      double diffusion, double rhs_constant, Stabilization stabilization);

/// Jet drift with diffusion taken from the caller.
LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const JetParameters& p,
                      double diffusion, double rhs_constant, Stabilization stabilization);

/// Constrains every dof whose vertex carries `marker` to `value`: constrained
/// rows become identity rows and their columns are eliminated into the rhs.
/// Throws MarkerError when no vertex carries the marker.
void apply_dirichlet(LinearSystem& sys, BoundaryMarker marker, double value);

/// Constrains the given vertices to per-vertex values from `value_of`.
void apply_dirichlet(LinearSystem& sys, const std::vector<std::size_t>& vertices,
                     const std::function<double(PhasePoint)>& value_of);

/// Merges each (left, right) pair into one dof. Must precede Dirichlet
/// constraints. Throws PairingError for non-bijective pairs.
void apply_periodic(LinearSystem& sys, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

struct SolverOptions {
    double tol = 1e-10;
    std::size_t max_iter = 5000;
    std::size_t restart = 60;
    /// Systems with fewer dofs use sparse LU.
    std::size_t direct_threshold = 200000;
};

/// Solves and scatters dof values back to vertices. Throws SolverError with
/// the residual history on breakdown, iteration cap or residual above tol.
ScalarField solve(const LinearSystem& sys, const SolverOptions& options = {},
                  FieldMeaning meaning = FieldMeaning::Generic);

/// Solves several right-hand sides sharing one constrained matrix.
std::vector<ScalarField> solve_many(const LinearSystem& sys,
                                    const std::vector<std::vector<double>>& rhs_list,
                                    const SolverOptions& options, FieldMeaning meaning);

/// Exact P1 quadrature: sum of area times mean vertex value.
double integrate(const ScalarField& field);

struct Extremum {
    double value = 0.0;
    PhasePoint location;
    std::size_t vertex = 0;
};

/// Maximum nodal value; ties go to the lowest vertex index.
Extremum field_extremum(const ScalarField& field);

/// L2 norm of (field - exact) by a degree-5 triangle rule on the P1 interpolant.
double l2_error(const ScalarField& field, const std::function<double(PhasePoint)>& exact);

/// Linear interpolation of the field at a point; nullopt outside the mesh.
std::optional<double> interpolate(const ScalarField& field, PhasePoint pt);

}  // namespace jetexit
