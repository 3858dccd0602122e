#pragma once

#include <cstddef>
#include <vector>

#include "jetexit/exitproblem.hpp"
#include "jetexit/mc_oracle.hpp"

namespace jetexit {

/// Interior probes on a 5-column grid across the domain at 30% and 70% of
/// the local gap between the lower and upper boundaries (n even, n >= 2).
std::vector<PhasePoint> probe_points(const DomainSpec& d, std::size_t n = 10);

/// Default Monte Carlo step per domain kind.
double default_mc_dt(DomainKind kind);

struct ProbeComparison {
    PhasePoint point;
    double fem_escape_upper = 0.0;
    double fem_mrt = 0.0;
    ExitStatistics mc;
    /// |MC - FEM| in MC standard errors.
    double z_escape = 0.0;
    double z_time = 0.0;
    bool pass = false;
};

struct ValidationOptions {
    std::size_t n_probes = 10;
    McOptions mc;
    double z_limit = 3.0;
    /// Paths per dt in the convergence study (at the first probe), which
    /// runs at 4 dt, 2 dt, dt.
    std::size_t study_paths = 2000;
    bool run_dt_study = true;
};

struct CrossValidation {
    std::vector<ProbeComparison> probes;
    DtStudy dt_study;
    bool pass = false;
};

/// FEM escape probability (through Gamma_upper) and MRT against Monte Carlo
/// at the probe points. The MC time cap is 30x the FEM maximum MRT.
CrossValidation cross_validate(const JetParameters& p, const DomainSpec& d,
                               std::shared_ptr<const TriangleMesh> mesh, const ExitSettings& s,
                               const ValidationOptions& o);

}  // namespace jetexit
