#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "jetexit/flowfield.hpp"
#include "jetexit/geometry.hpp"

namespace jetexit {

struct McOptions {
    double dt = 1e-3;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    /// Diffusion coefficient D of the generator D Lap + a . grad; noise
    /// increments are sqrt(2 D dt) xi. Defaults to epsilon.
    std::optional<double> diffusion;
    /// Cap on simulated time per path.
    double max_time = 1e4;
    bool allow_censoring = false;
    /// 0: JETEXIT_THREADS or hardware concurrency.
    unsigned threads = 0;
};

struct ExitStatistics {
    PhasePoint start;
    std::size_t n_paths = 0;
    std::map<BoundaryMarker, std::size_t> exit_counts;
    double mean_exit_time = 0.0;
    double std_err_time = 0.0;
    std::map<BoundaryMarker, double> std_err_prob;
    std::uint64_t rng_seed = 0;
    double dt = 0.0;
    double diffusion = 0.0;
    std::size_t censored = 0;

    /// Fraction of paths that left through `marker`.
    double fraction(BoundaryMarker marker) const;
};

/// Euler-Maruyama first-exit simulation under the jet drift. Exits are
/// detected by a sign change of DomainSpec::signed_gap; the exit time is
/// interpolated linearly in the gap. Path i uses a generator seeded from
/// (seed, i), so results do not depend on the thread count.
/// Throws ParameterError for bad options or a start outside the domain and
/// CensoringError when paths hit max_time unless censoring is allowed.
ExitStatistics simulate_first_exit(const JetParameters& p, const DomainSpec& d, PhasePoint start,
                                   const McOptions& options);

/// Same with an arbitrary drift and explicit diffusion.
ExitStatistics simulate_first_exit(const DriftField& drift, double diffusion, const DomainSpec& d,
                                   PhasePoint start, const McOptions& options);

struct DtStudyRow {
    double dt = 0.0;
    ExitStatistics stats;
    /// Agrees with the previous (larger) dt within combined 2 sigma in both
    /// the upper-exit fraction and the mean exit time.
    bool agrees_with_previous = false;
};

struct DtStudy {
    std::vector<DtStudyRow> rows;
    /// Two smallest dt values agree.
    bool converged = false;
};

/// `dts` must be strictly decreasing.
DtStudy dt_convergence_study(const JetParameters& p, const DomainSpec& d, PhasePoint start,
                             const std::vector<double>& dts, const McOptions& options);
DtStudy dt_convergence_study(const DriftField& drift, double diffusion, const DomainSpec& d,
                             PhasePoint start, const std::vector<double>& dts, const McOptions& options);

/// Worker count: JETEXIT_THREADS if set and positive, else hardware concurrency.
unsigned default_thread_count();

}  // namespace jetexit
