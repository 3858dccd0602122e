#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "jetexit/error.hpp"
#include "jetexit/exitproblem.hpp"

using namespace jetexit;

namespace {

Resolution coarse() {
    Resolution r;
    r.eddy_radial = 16;
    r.eddy_angular = 64;
    r.core_x = 48;
    r.core_y = 16;
    return r;
}

ExitSettings pure_diffusion(double diffusion) {
    ExitSettings s;
    s.drift_override = zero_drift();
    s.diffusion = diffusion;
    return s;
}

SweepTable synthetic(const std::vector<double>& betas, const std::function<void(SweepRow&)>& fill) {
    SweepTable t;
    for (double b : betas) {
        SweepRow r;
        r.beta = b;
        fill(r);
        t.rows.push_back(r);
    }
    return t;
}

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

}  // namespace

TEST(PureDiffusion, StripEscapeAverageIsHalf) {
    const auto p = make_params(1.0 / 3.0);
    const auto d = make_strip_domain(0.0, 1.5, -0.4, 0.4);
    const auto sol = solve_escape(p, d, BoundaryMarker::GammaUpper, coarse(), pure_diffusion(p.epsilon()));
    EXPECT_NEAR(sol.average, 0.5, 1e-6);
}

TEST(PureDiffusion, DiskResidenceTime) {
    // D Lap T = -1 on a disk of radius R: T = (R^2 - r^2) / (4 D).
    const auto p = make_params(1.0 / 3.0);
    const double radius = 0.5, dif = p.epsilon();
    const auto d = make_disk_domain({1.0, -0.3}, radius);
    Resolution r;
    r.eddy_radial = 8;
    r.eddy_angular = 32;
    r.refinements = 2;
    const auto t = solve_mrt(p, d, r, pure_diffusion(dif));
    const double exact = radius * radius / (4.0 * dif);
    EXPECT_NEAR(field_extremum(t).value, exact, 0.01 * exact);
    const auto esc = solve_escape(p, d, BoundaryMarker::GammaUpper, r, pure_diffusion(dif));
    EXPECT_NEAR(esc.average, 0.5, 1e-3);
}

TEST(JetExit, SweepRowIdentitiesAtModerateResolution) {
    const auto row = sweep_row(1.0 / 3.0, coarse(), JetPhase::Trough, ExitSettings{});
    ASSERT_TRUE(row.ok) << row.error;
    // Mesh area and spline area differ slightly, so the sum is not exactly 1.
    EXPECT_NEAR(row.p_eddy_upper + row.p_eddy_lower, 1.0, 2e-3);
    EXPECT_NEAR(row.p_core_upper + row.p_core_lower, 1.0, 2e-4);
    EXPECT_GT(row.max_mrt_eddy, 0.0);
    EXPECT_GT(row.max_mrt_core, row.max_mrt_eddy);
    for (SweepColumn c : {SweepColumn::EddyUpper, SweepColumn::EddyLower, SweepColumn::CoreUpper, SweepColumn::CoreLower}) {
        EXPECT_GE(row.get(c), 0.0);
        EXPECT_LE(row.get(c), 1.0);
    }
}

TEST(JetExit, EscapePairIsComplementaryPointwise) {
    const auto p = make_params(0.25);
    const auto d = build_eddy_domain(p, 1e-3);
    const auto mesh = build_mesh(d, coarse());
    const auto pair = solve_escape_pair(p, mesh);
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v) {
        EXPECT_NEAR(pair.upper.field.values[v] + pair.lower.field.values[v], 1.0, 1e-10);
    }
    const auto single = solve_escape(p, mesh, BoundaryMarker::GammaLower);
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v) {
        EXPECT_NEAR(single.field.values[v], pair.lower.field.values[v], 1e-10);
    }
}

TEST(JetExit, ResidenceTimeIsPositiveInside) {
    const auto p = make_params(0.4);
    const auto d = build_jet_core_domain(p, JetPhase::Trough, 1e-3);
    const auto mesh = build_mesh(d, coarse());
    const auto t = solve_mrt(p, mesh);
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v) {
        if (mesh->markers[v] == BoundaryMarker::Interior) EXPECT_GT(t.values[v], 0.0);
        else EXPECT_EQ(t.values[v], 0.0);
    }
}

TEST(JetExit, CrestMirrorsTrough) {
    // The crest cell is the trough cell under (x, y) -> (x + L/2, -y), which
    // swaps the two boundaries.
    const auto p = make_params(0.45);
    const auto trough = build_jet_core_domain(p, JetPhase::Trough, 1e-3);
    const auto crest = build_jet_core_domain(p, JetPhase::Crest, 1e-3);
    const auto t = solve_escape_pair(p, build_mesh(trough, coarse()));
    const auto c = solve_escape_pair(p, build_mesh(crest, coarse()));
    EXPECT_NEAR(c.upper.average, t.lower.average, 1e-8);
    EXPECT_NEAR(c.lower.average, t.upper.average, 1e-8);
}

TEST(Sweep, RejectsBadGrids) {
    EXPECT_THROW(sweep_beta({0.1, 0.7}, coarse(), JetPhase::Trough), ParameterError);
    EXPECT_THROW(sweep_beta({0.2, 0.2}, coarse(), JetPhase::Trough), ParameterError);
    EXPECT_THROW(sweep_beta({0.3, 0.1}, coarse(), JetPhase::Trough), ParameterError);
}

TEST(Sweep, EndpointsAreClipped) {
    Resolution r;
    r.eddy_radial = 6;
    r.eddy_angular = 24;
    r.core_x = 16;
    r.core_y = 6;
    const auto t = sweep_beta({0.0, 2.0 / 3.0}, r, JetPhase::Trough);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(t.rows[0].beta, 1e-3);
    EXPECT_DOUBLE_EQ(t.rows[1].beta, 2.0 / 3.0 - 1e-3);
}

TEST(Crossing, LinearDifferenceIsExact) {
    const auto t = synthetic(grid(0.01, 0.65, 17), [](SweepRow& r) {
        r.p_eddy_upper = 0.5 + (r.beta - 0.2);
        r.p_eddy_lower = 0.5;
    });
    EXPECT_NEAR(find_crossing(t, SweepColumn::EddyUpper, SweepColumn::EddyLower), 0.2, 1e-12);
    EXPECT_NEAR(find_crossing(t, SweepColumn::EddyLower, SweepColumn::EddyUpper), 0.2, 1e-12);
}

TEST(Crossing, StructureErrors) {
    const auto none = synthetic(grid(0.01, 0.65, 10), [](SweepRow& r) {
        r.p_core_upper = 0.5;
        r.p_core_lower = 0.5;
    });
    EXPECT_THROW(find_crossing(none, SweepColumn::CoreUpper, SweepColumn::CoreLower), CrossingStructureError);
    const auto twice = synthetic(grid(0.01, 0.65, 30), [](SweepRow& r) {
        r.p_eddy_upper = std::sin(20.0 * r.beta);
        r.p_eddy_lower = 0.0;
    });
    try {
        find_crossing(twice, SweepColumn::EddyUpper, SweepColumn::EddyLower);
        FAIL() << "expected CrossingStructureError";
    } catch (const CrossingStructureError& e) {
        EXPECT_NE(std::string(e.what()).find("+-"), std::string::npos);
    }
    // A window holding only one sign change succeeds.
    const double x = find_crossing(twice, SweepColumn::EddyUpper, SweepColumn::EddyLower, 0.05, 0.25);
    EXPECT_NEAR(x, std::numbers::pi / 20.0, 2e-3);
}

TEST(Crossing, FailedRowsAreSkipped) {
    auto t = synthetic(grid(0.01, 0.65, 17), [](SweepRow& r) {
        r.p_eddy_upper = r.beta;
        r.p_eddy_lower = 0.4;
    });
    t.rows[3].ok = false;
    t.rows[3].p_eddy_upper = 99.0;
    EXPECT_NEAR(find_crossing(t, SweepColumn::EddyUpper, SweepColumn::EddyLower), 0.4, 1e-12);
}

TEST(Extremum, ParabolaIsExact) {
    const auto t = synthetic(grid(0.01, 0.65, 28), [](SweepRow& r) { r.max_mrt_eddy = 5.0 - (r.beta - 0.3) * (r.beta - 0.3); });
    EXPECT_NEAR(find_extremum(t, SweepColumn::MaxMrtEddy), 0.3, 1e-12);
}

TEST(Extremum, StructureErrors) {
    const auto rising = synthetic(grid(0.01, 0.65, 10), [](SweepRow& r) { r.max_mrt_core = r.beta; });
    EXPECT_THROW(find_extremum(rising, SweepColumn::MaxMrtCore), ExtremumStructureError);
    const auto bimodal = synthetic(grid(0.01, 0.65, 30), [](SweepRow& r) { r.max_mrt_core = std::cos(25.0 * r.beta); });
    EXPECT_THROW(find_extremum(bimodal, SweepColumn::MaxMrtCore), ExtremumStructureError);
    const auto two = synthetic({0.1, 0.2}, [](SweepRow& r) { r.max_mrt_core = 1.0; });
    EXPECT_THROW(find_extremum(two, SweepColumn::MaxMrtCore), ExtremumStructureError);
}

TEST(Monotonicity, Verdicts) {
    const auto up = synthetic(grid(0.01, 0.65, 8), [](SweepRow& r) { r.max_mrt_core = std::exp(r.beta); });
    auto v = monotonicity_check(up, SweepColumn::MaxMrtCore);
    EXPECT_EQ(v.trend, Trend::Increasing);
    EXPECT_FALSE(v.first_violation.has_value());
    EXPECT_TRUE(v.ties.empty());

    const auto down = synthetic(grid(0.01, 0.65, 8), [](SweepRow& r) { r.max_mrt_eddy = -r.beta; });
    EXPECT_EQ(monotonicity_check(down, SweepColumn::MaxMrtEddy).trend, Trend::Decreasing);

    const auto flat = synthetic(grid(0.01, 0.65, 5), [](SweepRow& r) { r.max_mrt_eddy = 2.0; });
    v = monotonicity_check(flat, SweepColumn::MaxMrtEddy);
    EXPECT_EQ(v.trend, Trend::Neither);
    EXPECT_EQ(v.ties.size(), 4u);

    auto kink = up;
    kink.rows[5].max_mrt_core = 0.0;
    v = monotonicity_check(kink, SweepColumn::MaxMrtCore);
    EXPECT_EQ(v.trend, Trend::Neither);
    ASSERT_TRUE(v.first_violation.has_value());
    EXPECT_EQ(v.first_violation->first, 4u);
    EXPECT_EQ(v.first_violation->second, 5u);
}

TEST(Grid, RefineAndMerge) {
    const auto base = default_sweep_grid();
    ASSERT_EQ(base.size(), 28u);
    EXPECT_DOUBLE_EQ(base.front(), 0.01);
    EXPECT_DOUBLE_EQ(base.back(), 0.65);
    const auto g = refine_grid(base, {0.333, 0.66});
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i] - g[i - 1], 0.001);
    for (double want : {0.313, 0.323, 0.333, 0.343, 0.353}) {
        const bool found = std::any_of(g.begin(), g.end(), [&](double b) { return std::abs(b - want) < 0.0026; });
        EXPECT_TRUE(found) << want;
    }
    EXPECT_LE(g.back(), 2.0 / 3.0 - 1e-3);

    SweepTable t = synthetic({0.1, 0.3}, [](SweepRow& r) { r.max_mrt_core = r.beta; });
    merge_rows(t, synthetic({0.2, 0.3, 0.05}, [](SweepRow& r) { r.max_mrt_core = -1.0; }));
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_DOUBLE_EQ(t.rows[0].beta, 0.05);
    EXPECT_DOUBLE_EQ(t.rows[3].beta, 0.3);
    EXPECT_DOUBLE_EQ(t.rows[3].max_mrt_core, 0.3);
}
