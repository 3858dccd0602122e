#include "jetexit/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include "jetexit/error.hpp"

namespace jetexit {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Tabulated graph boundaries for fast gap screening; falls back to the exact
// spline gap near the boundary and outside the tabulated x range.
class GapOracle {
public:
    explicit GapOracle(const DomainSpec& d) : d_(d) {
        const std::size_t n = 8192;
        x0_ = d.x_left;
        h_ = d.period() / static_cast<double>(n);
        up_.resize(n + 1);
        lo_.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = i == n ? d.x_right : x0_ + h_ * static_cast<double>(i);
            up_[i] = d.boundary_y(BoundaryMarker::GammaUpper, x).value_or(0.0);
            lo_[i] = d.boundary_y(BoundaryMarker::GammaLower, x).value_or(0.0);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = x0_ + h_ * (static_cast<double>(i) + 0.5);
            const auto u = d.boundary_y(BoundaryMarker::GammaUpper, x);
            const auto l = d.boundary_y(BoundaryMarker::GammaLower, x);
            if (u) err = std::max(err, std::abs(*u - 0.5 * (up_[i] + up_[i + 1])));
            if (l) err = std::max(err, std::abs(*l - 0.5 * (lo_[i] + lo_[i + 1])));
        }
        margin_ = 4.0 * err + 1e-6;
    }

    double operator()(PhasePoint pt) const {
        const double x = d_.wrap_x(pt.x);
        const double s = (x - x0_) / h_;
        if (s >= 0.0 && s < static_cast<double>(up_.size() - 1)) {
            const auto i = static_cast<std::size_t>(s);
            const double w = s - static_cast<double>(i);
            const double up = up_[i] + w * (up_[i + 1] - up_[i]);
            const double lo = lo_[i] + w * (lo_[i + 1] - lo_[i]);
            const double g = std::min(up - pt.y, pt.y - lo);
            if (g > margin_) return g;
        }
        return d_.signed_gap(pt);
    }

    BoundaryMarker nearest_marker(PhasePoint pt) const {
        const double x = std::clamp(d_.wrap_x(pt.x), d_.x_left, d_.x_right);
        const auto up = d_.boundary_y(BoundaryMarker::GammaUpper, x);
        const auto lo = d_.boundary_y(BoundaryMarker::GammaLower, x);
        if (!up || !lo) return pt.y >= d_.center.y ? BoundaryMarker::GammaUpper : BoundaryMarker::GammaLower;
        return (*up - pt.y) <= (pt.y - *lo) ? BoundaryMarker::GammaUpper : BoundaryMarker::GammaLower;
    }

private:
    const DomainSpec& d_;
    double x0_ = 0.0;
    double h_ = 1.0;
    double margin_ = 0.0;
    std::vector<double> up_;
    std::vector<double> lo_;
};

struct PathOutcome {
    BoundaryMarker marker = BoundaryMarker::Interior;
    double time = 0.0;
};

template <class Drift>
PathOutcome run_path(const Drift& drift, double sigma, const GapOracle& gap, PhasePoint start,
                     const McOptions& o, std::size_t path) {
    std::mt19937_64 rng(splitmix64(o.seed ^ splitmix64(static_cast<std::uint64_t>(path))));
    std::normal_distribution<double> normal;
    PhasePoint q = start;
    double g0 = gap(q);
    double t = 0.0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(o.max_time / o.dt));
    for (std::size_t step = 0; step < max_steps; ++step) {
        const VelocityVector a = drift(q);
        const double n1 = normal(rng);
        const double n2 = normal(rng);
        const PhasePoint next{q.x + a.u * o.dt + sigma * n1, q.y + a.v * o.dt + sigma * n2};
        const double g1 = gap(next);
        if (g1 <= 0.0) {
            const double theta = g0 / (g0 - g1);
            const PhasePoint hit = q + theta * (next - q);
            return {gap.nearest_marker(hit), t + theta * o.dt};
        }
        q = next;
        g0 = g1;
        t += o.dt;
    }
    return {BoundaryMarker::Interior, t};
}

template <class Drift>
ExitStatistics simulate(const Drift& drift, double diffusion, const DomainSpec& d, PhasePoint start,
                        const McOptions& o) {
    if (!(o.dt > 0.0)) throw ParameterError("dt", "time step must be positive");
    if (o.n_paths < 1) throw ParameterError("n_paths", "need at least one path");
    if (!(diffusion > 0.0)) throw ParameterError("diffusion", "diffusion must be positive");
    if (!(o.max_time > 0.0)) throw ParameterError("max_time", "max_time must be positive");
    if (!d.contains(start)) {
        std::ostringstream msg;
        msg << "start (" << start.x << ", " << start.y << ") is not strictly inside the domain";
        throw ParameterError("start", msg.str());
    }
    const GapOracle gap(d);
    const double sigma = std::sqrt(2.0 * diffusion * o.dt);
    std::vector<PathOutcome> out(o.n_paths);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(o.threads ? o.threads : default_thread_count(), o.n_paths));
    auto work = [&](unsigned w) {
        for (std::size_t i = w; i < o.n_paths; i += workers) out[i] = run_path(drift, sigma, gap, start, o, i);
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    ExitStatistics s;
    s.start = start;
    s.n_paths = o.n_paths;
    s.rng_seed = o.seed;
    s.dt = o.dt;
    s.diffusion = diffusion;
    s.exit_counts[BoundaryMarker::GammaUpper] = 0;
    s.exit_counts[BoundaryMarker::GammaLower] = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t exited = 0;
    for (const PathOutcome& r : out) {
        if (r.marker == BoundaryMarker::Interior) {
            ++s.censored;
            continue;
        }
        ++s.exit_counts[r.marker];
        ++exited;
        sum += r.time;
        sum_sq += r.time * r.time;
    }
    if (s.censored > 0 && !o.allow_censoring) {
        std::ostringstream msg;
        msg << s.censored << " of " << o.n_paths << " paths did not exit before t = " << o.max_time;
        throw CensoringError(s.censored, msg.str());
    }
    if (exited > 0) {
        const double n = static_cast<double>(exited);
        s.mean_exit_time = sum / n;
        const double var = exited > 1 ? std::max(0.0, (sum_sq - n * s.mean_exit_time * s.mean_exit_time) / (n - 1.0)) : 0.0;
        s.std_err_time = std::sqrt(var / n);
    }
    for (const auto& [marker, count] : s.exit_counts) {
        const double pr = static_cast<double>(count) / static_cast<double>(o.n_paths);
        s.std_err_prob[marker] = std::sqrt(pr * (1.0 - pr) / static_cast<double>(o.n_paths));
    }
    return s;
}

template <class Run>
DtStudy study(const std::vector<double>& dts, const McOptions& options, Run&& run) {
    for (std::size_t i = 1; i < dts.size(); ++i) {
        if (!(dts[i] < dts[i - 1])) throw ParameterError("dts", "time steps must be strictly decreasing");
    }
    DtStudy st;
    for (double dt : dts) {
        McOptions o = options;
        o.dt = dt;
        DtStudyRow row;
        row.dt = dt;
        row.stats = run(o);
        if (!st.rows.empty()) {
            const ExitStatistics& a = st.rows.back().stats;
            const ExitStatistics& b = row.stats;
            const auto up = BoundaryMarker::GammaUpper;
            const double dp = std::abs(a.fraction(up) - b.fraction(up));
            const double sp = std::hypot(a.std_err_prob.at(up), b.std_err_prob.at(up));
            const double dtm = std::abs(a.mean_exit_time - b.mean_exit_time);
            const double stm = std::hypot(a.std_err_time, b.std_err_time);
            row.agrees_with_previous = dp <= 2.0 * sp + 1e-15 && dtm <= 2.0 * stm + 1e-15;
        }
        st.rows.push_back(std::move(row));
    }
    st.converged = st.rows.size() >= 2 && st.rows.back().agrees_with_previous;
    return st;
}

}  // namespace

double ExitStatistics::fraction(BoundaryMarker marker) const {
    const auto it = exit_counts.find(marker);
    if (it == exit_counts.end() || n_paths == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(n_paths);
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("JETEXIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExitStatistics simulate_first_exit(const JetParameters& p, const DomainSpec& d, PhasePoint start,
                                   const McOptions& options) {
    const auto drift = [&p](PhasePoint q) { return velocity(p, q); };
    return simulate(drift, options.diffusion.value_or(p.epsilon()), d, start, options);
}

ExitStatistics simulate_first_exit(const DriftField& drift, double diffusion, const DomainSpec& d,
                                   PhasePoint start, const McOptions& options) {
    return simulate(drift, diffusion, d, start, options);
}

DtStudy dt_convergence_study(const JetParameters& p, const DomainSpec& d, PhasePoint start,
                             const std::vector<double>& dts, const McOptions& options) {
    return study(dts, options, [&](const McOptions& o) { return simulate_first_exit(p, d, start, o); });
}

DtStudy dt_convergence_study(const DriftField& drift, double diffusion, const DomainSpec& d,
                             PhasePoint start, const std::vector<double>& dts, const McOptions& options) {
    return study(dts, options,
                 [&](const McOptions& o) { return simulate_first_exit(drift, diffusion, d, start, o); });
}

}  // namespace jetexit
