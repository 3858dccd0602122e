#include <gtest/gtest.h>

#include <cmath>

#include "jetexit/error.hpp"
#include "jetexit/mc_oracle.hpp"

using namespace jetexit;

namespace {

constexpr double kLo = -0.4;
constexpr double kHi = 0.4;

const DomainSpec& strip() {
    static const DomainSpec d = make_strip_domain(0.0, 1.0, kLo, kHi);
    return d;
}

// Pure diffusion between two walls: linear escape probability, parabolic
// mean exit time.
double strip_escape(double y) { return (y - kLo) / (kHi - kLo); }
double strip_time(double y, double dif) { return (y - kLo) * (kHi - y) / (2.0 * dif); }

McOptions opts(double dt, std::size_t paths, std::uint64_t seed = 1) {
    McOptions o;
    o.dt = dt;
    o.n_paths = paths;
    o.seed = seed;
    return o;
}

}  // namespace

TEST(MonteCarlo, StripMatchesExactSolution) {
    const double dif = 0.05;
    const PhasePoint start{0.5, 0.1};
    // ~10^4 steps per path keeps the discrete-monitoring bias under 1 SE.
    const auto s = simulate_first_exit(zero_drift(), dif, strip(), start, opts(1e-4, 4000));
    EXPECT_EQ(s.n_paths, 4000u);
    EXPECT_EQ(s.censored, 0u);
    const double pu = s.fraction(BoundaryMarker::GammaUpper);
    EXPECT_LE(std::abs(pu - strip_escape(start.y)), 3.0 * s.std_err_prob.at(BoundaryMarker::GammaUpper));
    EXPECT_LE(std::abs(s.mean_exit_time - strip_time(start.y, dif)), 3.0 * s.std_err_time);
    EXPECT_NEAR(pu + s.fraction(BoundaryMarker::GammaLower), 1.0, 1e-15);
}

TEST(MonteCarlo, DiskResidenceTime) {
    // T(center) = R^2 / (4 D) = 62.5.
    const auto d = make_disk_domain({0.0, 0.0}, 0.5);
    const auto s = simulate_first_exit(zero_drift(), 1e-3, d, {0.0, 0.0}, opts(1e-2, 10000));
    EXPECT_LE(std::abs(s.mean_exit_time - 62.5), 3.0 * s.std_err_time);
    EXPECT_LT(s.std_err_time, 0.01 * 62.5);
}

TEST(MonteCarlo, ReproducibleAndThreadIndependent) {
    const auto p = make_params(1.0 / 3.0);
    const auto d = build_eddy_domain(p, 1e-3);
    const PhasePoint start = d.center + PhasePoint{0.1, 0.0};
    auto o = opts(1e-2, 300, 42);
    o.threads = 1;
    const auto a = simulate_first_exit(p, d, start, o);
    const auto b = simulate_first_exit(p, d, start, o);
    o.threads = 3;
    const auto c = simulate_first_exit(p, d, start, o);
    for (const auto* s : {&b, &c}) {
        EXPECT_EQ(s->exit_counts, a.exit_counts);
        EXPECT_EQ(s->mean_exit_time, a.mean_exit_time);
        EXPECT_EQ(s->std_err_time, a.std_err_time);
    }
    EXPECT_EQ(a.rng_seed, 42u);
    EXPECT_DOUBLE_EQ(a.diffusion, p.epsilon());
    o.seed = 43;
    EXPECT_NE(simulate_first_exit(p, d, start, o).mean_exit_time, a.mean_exit_time);
}

TEST(MonteCarlo, PeriodicSidesAreNotExits) {
    // Strong zonal drift wraps every path around the cell many times.
    const DriftField zonal = [](PhasePoint) { return VelocityVector{5.0, 0.0}; };
    const auto s = simulate_first_exit(zonal, 0.01, strip(), {0.9, 0.0}, opts(1e-3, 500));
    const std::size_t up = s.exit_counts.count(BoundaryMarker::GammaUpper) ? s.exit_counts.at(BoundaryMarker::GammaUpper) : 0;
    const std::size_t lo = s.exit_counts.count(BoundaryMarker::GammaLower) ? s.exit_counts.at(BoundaryMarker::GammaLower) : 0;
    EXPECT_EQ(up + lo, 500u);
    EXPECT_GT(s.mean_exit_time * 5.0, 10.0);
}

TEST(MonteCarlo, CensoringIsReported) {
    auto o = opts(1e-2, 100);
    o.max_time = 0.5;
    try {
        simulate_first_exit(zero_drift(), 1e-3, strip(), {0.5, 0.0}, o);
        FAIL() << "expected CensoringError";
    } catch (const CensoringError& e) {
        EXPECT_EQ(e.censored(), 100u);
    }
    o.allow_censoring = true;
    EXPECT_EQ(simulate_first_exit(zero_drift(), 1e-3, strip(), {0.5, 0.0}, o).censored, 100u);
}

TEST(MonteCarlo, RejectsBadOptions) {
    EXPECT_THROW(simulate_first_exit(zero_drift(), 1e-3, strip(), {0.5, 0.0}, opts(0.0, 10)), ParameterError);
    EXPECT_THROW(simulate_first_exit(zero_drift(), 1e-3, strip(), {0.5, 0.0}, opts(1e-3, 0)), ParameterError);
    EXPECT_THROW(simulate_first_exit(zero_drift(), -1.0, strip(), {0.5, 0.0}, opts(1e-3, 10)), ParameterError);
    EXPECT_THROW(simulate_first_exit(zero_drift(), 1e-3, strip(), {0.5, 0.5}, opts(1e-3, 10)), ParameterError);
}

TEST(DtStudy, BiasShrinksWithStep) {
    const double dif = 0.05;
    const PhasePoint start{0.5, 0.0};
    const auto study = dt_convergence_study(zero_drift(), dif, strip(), start, {6e-2, 1.5e-2, 3.75e-3}, opts(1.0, 4000));
    ASSERT_EQ(study.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(study.rows[1].dt, 1.5e-2);
    EXPECT_FALSE(study.rows[0].agrees_with_previous);
    // Discrete monitoring misses excursions, so exit times are biased high
    // and the bias falls with dt.
    const double exact = strip_time(start.y, dif);
    double prev = 1e9;
    for (const auto& r : study.rows) {
        const double bias = r.stats.mean_exit_time - exact;
        EXPECT_GT(bias, 0.0) << r.dt;
        EXPECT_LT(bias, prev) << r.dt;
        prev = bias;
    }
    EXPECT_THROW(dt_convergence_study(zero_drift(), dif, strip(), start, {1e-3, 2e-3}, opts(1.0, 10)), ParameterError);
}

TEST(Calibration, ConfidenceIntervalsCover) {
    // 100 independent estimates of a known escape probability; a 3-sigma
    // band should hold at least 99 of them.
    const double dif = 0.05;
    const PhasePoint start{0.5, -0.15};
    const double exact = strip_escape(start.y);
    int inside = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto s = simulate_first_exit(zero_drift(), dif, strip(), start, opts(1e-3, 200, 1000 + rep));
        const double se = std::sqrt(exact * (1.0 - exact) / 200.0);
        if (std::abs(s.fraction(BoundaryMarker::GammaUpper) - exact) <= 3.0 * se) ++inside;
    }
    EXPECT_GE(inside, 99);
}
