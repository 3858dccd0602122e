#include "jetexit/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

// coth(pe) - 1/pe, with its series near zero.
double upwind_factor(double pe) {
    if (pe < 1e-3) return pe / 3.0 - pe * pe * pe / 45.0;
    if (pe > 30.0) return 1.0 - 1.0 / pe;
    return 1.0 / std::tanh(pe) - 1.0 / pe;
}

struct Dunavant5 {
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> weight;
};

Dunavant5 degree5_rule() {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    return {{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
              {a1, b1, b1},
              {b1, a1, b1},
              {b1, b1, a1},
              {a2, b2, b2},
              {b2, a2, b2},
              {b2, b2, a2}}},
            {0.225, w1, w1, w1, w2, w2, w2}};
}

void eliminate(LinearSystem& sys, const std::vector<std::size_t>& dofs,
               const std::vector<double>& values) {
    std::vector<char> hit(sys.dof_count, 0);
    std::vector<double> g(sys.dof_count, 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        hit[dofs[k]] = 1;
        g[dofs[k]] = values[k];
        sys.constrained[dofs[k]] = 1;
        sys.constrained_value[dofs[k]] = values[k];
    }
    CsrMatrix& a = sys.matrix;
    for (std::size_t i = 0; i < a.rows; ++i) {
        if (hit[i]) {
            for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                a.val[k] = a.col[k] == i ? 1.0 : 0.0;
            }
            sys.rhs[i] = g[i];
            continue;
        }
        if (sys.constrained[i]) continue;
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const std::size_t j = a.col[k];
            if (hit[j] && a.val[k] != 0.0) {
                sys.rhs[i] -= a.val[k] * g[j];
                a.val[k] = 0.0;
            }
        }
    }
}

}  // namespace

std::string to_string(Stabilization s) {
    return s == Stabilization::None ? "none" : "streamline_diffusion";
}

std::string to_string(FieldMeaning m) {
    switch (m) {
        case FieldMeaning::EscapeProbability: return "escape_probability";
        case FieldMeaning::ResidenceTime: return "residence_time";
        case FieldMeaning::Generic: return "generic";
    }
    return "generic";
}

LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const DriftField& drift,
                      double diffusion, const SourceFunction& rhs, Stabilization stabilization) {
    if (!(diffusion > 0.0)) throw ParameterError("diffusion", "diffusion must be positive");
    const TriangleMesh& m = *mesh;
    const std::size_t n = m.vertex_count();
    std::vector<Triplet> entries;
    entries.reserve(9 * m.triangle_count());
    std::vector<double> load(n, 0.0);

    for (const Triangle& tri : m.triangles) {
        const std::array<PhasePoint, 3> p{m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]};
        const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
        const double inv2a = 1.0 / (2.0 * area);
        std::array<PhasePoint, 3> grad;
        for (int i = 0; i < 3; ++i) {
            const PhasePoint a = p[(i + 1) % 3];
            const PhasePoint b = p[(i + 2) % 3];
            grad[i] = {(a.y - b.y) * inv2a, (b.x - a.x) * inv2a};
        }
        double k[3][3] = {};
        double f[3] = {};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) k[i][j] = diffusion * area * dot(grad[i], grad[j]);
        }

        double tau = 0.0;
        if (stabilization == Stabilization::StreamlineDiffusion) {
            const VelocityVector a = drift((1.0 / 3.0) * (p[0] + p[1] + p[2]));
            const PhasePoint wind{-a.u, -a.v};
            const double sp = norm(wind);
            double proj = 0.0;
            for (int i = 0; i < 3; ++i) proj += std::abs(dot(wind, grad[i]));
            if (sp > 1e-14 && proj > 0.0) {
                const double h = 2.0 * sp / proj;
                const double pe = sp * h / (2.0 * diffusion);
                tau = h / (2.0 * sp) * upwind_factor(pe);
            }
        }

        // Edge-midpoint rule; N_i is 1/2 at the midpoints of its two edges.
        for (int e = 0; e < 3; ++e) {
            const PhasePoint q = 0.5 * (p[e] + p[(e + 1) % 3]);
            const VelocityVector a = drift(q);
            const PhasePoint wind{-a.u, -a.v};
            const double src = -rhs(q);
            const double w = area / 3.0;
            double shape[3] = {0.0, 0.0, 0.0};
            shape[e] = 0.5;
            shape[(e + 1) % 3] = 0.5;
            double bg[3];
            for (int i = 0; i < 3; ++i) bg[i] = dot(wind, grad[i]);
            for (int i = 0; i < 3; ++i) {
                f[i] += w * (shape[i] + tau * bg[i]) * src;
                for (int j = 0; j < 3; ++j) k[i][j] += w * (shape[i] + tau * bg[i]) * bg[j];
            }
        }
        for (int i = 0; i < 3; ++i) {
            load[tri[i]] += f[i];
            for (int j = 0; j < 3; ++j) entries.push_back({tri[i], tri[j], k[i][j]});
        }
    }

    LinearSystem sys;
    sys.mesh = std::move(mesh);
    sys.matrix = CsrMatrix::from_triplets(n, n, std::move(entries));
    sys.rhs = std::move(load);
    sys.dof_count = n;
    sys.dof_of_vertex.resize(n);
    for (std::size_t v = 0; v < n; ++v) sys.dof_of_vertex[v] = v;
    sys.constrained.assign(n, 0);
    sys.constrained_value.assign(n, 0.0);
    return sys;
}

LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const DriftField& drift,
                      double diffusion, double rhs_constant, Stabilization stabilization) {
    return assemble(std::move(mesh), drift, diffusion,
                    [rhs_constant](PhasePoint) { return rhs_constant; }, stabilization);
}

LinearSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const JetParameters& p,
                      double diffusion, double rhs_constant, Stabilization stabilization) {
    return assemble(std::move(mesh), jet_drift(p), diffusion, rhs_constant, stabilization);
}

void apply_dirichlet(LinearSystem& sys, BoundaryMarker marker, double value) {
    std::set<std::size_t> dofs;
    for (std::size_t v = 0; v < sys.mesh->vertex_count(); ++v) {
        if (sys.mesh->markers[v] == marker) dofs.insert(sys.dof_of_vertex[v]);
    }
    if (dofs.empty()) throw MarkerError("no mesh vertex carries marker " + to_string(marker));
    const std::vector<std::size_t> list(dofs.begin(), dofs.end());
    eliminate(sys, list, std::vector<double>(list.size(), value));
}

void apply_dirichlet(LinearSystem& sys, const std::vector<std::size_t>& vertices,
                     const std::function<double(PhasePoint)>& value_of) {
    std::vector<std::size_t> dofs;
    std::vector<double> values;
    for (std::size_t v : vertices) {
        dofs.push_back(sys.dof_of_vertex[v]);
        values.push_back(value_of(sys.mesh->vertices[v]));
    }
    eliminate(sys, dofs, values);
}

void apply_periodic(LinearSystem& sys, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    if (sys.periodic_applied) throw PairingError("periodic pairs already merged");
    if (std::any_of(sys.constrained.begin(), sys.constrained.end(), [](char c) { return c != 0; })) {
        throw PairingError("periodic merge must precede Dirichlet constraints");
    }
    const std::size_t n = sys.dof_count;
    std::vector<std::ptrdiff_t> target(n, -1);
    std::vector<char> is_left(n, 0);
    for (const auto& [l, r] : pairs) {
        if (l >= n || r >= n || l == r) throw PairingError("periodic pair index out of range");
        if (target[r] >= 0 || is_left[r] || is_left[l] || target[l] >= 0) {
            throw PairingError("periodic pairs are not bijective");
        }
        target[r] = static_cast<std::ptrdiff_t>(l);
        is_left[l] = 1;
    }
    std::vector<std::size_t> map(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (target[i] < 0) map[i] = next++;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (target[i] >= 0) map[i] = map[static_cast<std::size_t>(target[i])];
    }
    std::vector<Triplet> t = sys.matrix.triplets();
    for (Triplet& e : t) {
        e.row = map[e.row];
        e.col = map[e.col];
    }
    std::vector<double> rhs(next, 0.0);
    for (std::size_t i = 0; i < n; ++i) rhs[map[i]] += sys.rhs[i];
    sys.matrix = CsrMatrix::from_triplets(next, next, std::move(t));
    sys.rhs = std::move(rhs);
    for (std::size_t& d : sys.dof_of_vertex) d = map[d];
    sys.dof_count = next;
    sys.constrained.assign(next, 0);
    sys.constrained_value.assign(next, 0.0);
    sys.periodic_applied = true;
}

std::vector<ScalarField> solve_many(const LinearSystem& sys,
                                    const std::vector<std::vector<double>>& rhs_list,
                                    const SolverOptions& options, FieldMeaning meaning) {
    std::vector<ScalarField> out;
    std::unique_ptr<SparseDirect> direct;
    const bool use_direct = sys.dof_count < options.direct_threshold;
    if (use_direct) direct = std::make_unique<SparseDirect>(sys.matrix);
    for (const auto& b : rhs_list) {
        const double bnorm = norm2(b);
        SolveReport report;
        std::vector<double> x;
        std::vector<double> history;
        if (use_direct) {
            report.method = "sparse_lu";
            x = direct->solve(b);
            std::vector<double> r = sys.matrix.multiply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
            double rel = bnorm > 0.0 ? norm2(r) / bnorm : norm2(r);
            history.push_back(rel);
            // Iterative refinement on the rare ill-conditioned case.
            for (int it = 0; it < 3 && rel > options.tol; ++it) {
                const std::vector<double> dx = direct->solve(r);
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
                r = sys.matrix.multiply(x);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
                rel = bnorm > 0.0 ? norm2(r) / bnorm : norm2(r);
                history.push_back(rel);
                ++report.iterations;
            }
            report.relative_residual = rel;
        } else {
            report.method = "gmres_ilu0";
            IterativeResult it = gmres_ilu(sys.matrix, b, options.tol, options.max_iter, options.restart);
            x = std::move(it.x);
            history = std::move(it.history);
            report.iterations = it.iterations;
            report.relative_residual = it.relative_residual;
        }
        if (!(report.relative_residual <= options.tol)) {
            std::ostringstream msg;
            msg << report.method << " did not reach relative residual " << options.tol << " (got "
                << report.relative_residual << ")";
            throw SolverError(msg.str(), history);
        }
        ScalarField field;
        field.mesh = sys.mesh;
        field.meaning = meaning;
        field.report = report;
        field.values.resize(sys.mesh->vertex_count());
        for (std::size_t v = 0; v < field.values.size(); ++v) field.values[v] = x[sys.dof_of_vertex[v]];
        out.push_back(std::move(field));
    }
    return out;
}

ScalarField solve(const LinearSystem& sys, const SolverOptions& options, FieldMeaning meaning) {
    return std::move(solve_many(sys, {sys.rhs}, options, meaning).front());
}

double integrate(const ScalarField& field) {
    const TriangleMesh& m = *field.mesh;
    double total = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const Triangle& tri = m.triangles[t];
        total += m.signed_area(t) *
                 (field.values[tri[0]] + field.values[tri[1]] + field.values[tri[2]]) / 3.0;
    }
    return total;
}

Extremum field_extremum(const ScalarField& field) {
    Extremum e;
    e.value = field.values.at(0);
    for (std::size_t v = 1; v < field.values.size(); ++v) {
        if (field.values[v] > e.value) {
            e.value = field.values[v];
            e.vertex = v;
        }
    }
    e.location = field.mesh->vertices[e.vertex];
    return e;
}

double l2_error(const ScalarField& field, const std::function<double(PhasePoint)>& exact) {
    const TriangleMesh& m = *field.mesh;
    const Dunavant5 rule = degree5_rule();
    double sum = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const Triangle& tri = m.triangles[t];
        const double area = m.signed_area(t);
        for (std::size_t q = 0; q < rule.weight.size(); ++q) {
            PhasePoint x;
            double uh = 0.0;
            for (int i = 0; i < 3; ++i) {
                x = x + rule.bary[q][i] * m.vertices[tri[i]];
                uh += rule.bary[q][i] * field.values[tri[i]];
            }
            const double e = uh - exact(x);
            sum += area * rule.weight[q] * e * e;
        }
    }
    return std::sqrt(sum);
}

std::optional<double> interpolate(const ScalarField& field, PhasePoint pt) {
    const TriangleMesh& m = *field.mesh;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const Triangle& tri = m.triangles[t];
        const PhasePoint a = m.vertices[tri[0]];
        const PhasePoint b = m.vertices[tri[1]];
        const PhasePoint c = m.vertices[tri[2]];
        const double det = cross(b - a, c - a);
        const double l1 = cross(pt - a, c - a) / det;
        const double l2 = cross(b - a, pt - a) / det;
        const double l0 = 1.0 - l1 - l2;
        const double tol = -1e-12;
        if (l0 >= tol && l1 >= tol && l2 >= tol) {
            return l0 * field.values[tri[0]] + l1 * field.values[tri[1]] + l2 * field.values[tri[2]];
        }
    }
    return std::nullopt;
}

}  // namespace jetexit
