#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <hetnet/calibration.hpp>
#include <hetnet/io.hpp>

using namespace hetnet;

namespace {

ExperimentConfig small_config(double density = 20.0) {
    ExperimentConfig c;
    c.monte_carlo.samples = 20'000;
    c.deployment.femto_density_per_km2 = density;
    c.traffic.capacities = {2, 2, 2, 2};
    return c;
}

std::vector<double> grid(double start, double stop, double step) {
    return Grid{start, stop, step}.values();
}

// Independent evaluation of the macro RSS at distance d for default powers.
double edge_rss(double d) { return 46.0 - (15.3 + 37.6 * std::log10(d) + 10.0); }

} // namespace

TEST(ThresholdSweep, LoadsMoveMonotonicallyWithThreshold) {
    const SweepResult s = sweep_threshold(100.0, grid(-110.0, -30.0, 2.0), small_config());
    ASSERT_EQ(s.points.size(), 41u);
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        EXPECT_LE(s.points[i].metrics.macro_load, s.points[i - 1].metrics.macro_load + 1e-12);
        EXPECT_GE(s.points[i].metrics.femto_load, s.points[i - 1].metrics.femto_load - 1e-12);
    }
}

TEST(ThresholdSweep, NoFemtoLoadBelowCellEdgeRss) {
    const SweepResult s = sweep_threshold(100.0, grid(-110.0, -96.0, 1.0), small_config());
    for (const SweepPoint &p : s.points) {
        EXPECT_EQ(p.metrics.femto_load, 0.0) << p.threshold;
        EXPECT_EQ(p.metrics.handoff_probability, 0.0);
    }
}

TEST(ThresholdSweep, SaturatesAboveRssAtExclusionRadius) {
    const double onset = edge_rss(100.0);
    EXPECT_NEAR(onset, -54.5, 0.05);
    const SweepResult s = sweep_threshold(100.0, grid(-54.0, -30.0, 1.0), small_config());
    const double band = 0.005;
    for (const SweepPoint &p : s.points) {
        EXPECT_NEAR(p.metrics.femto_load, s.points.front().metrics.femto_load, band);
        EXPECT_NEAR(p.metrics.macro_load, s.points.front().metrics.macro_load, band);
    }
}

TEST(ThresholdSweep, EmptyDeploymentCarriesNoFemtoLoad) {
    ExperimentConfig c = small_config();
    c.deployment.femto_count = 0;
    const SweepResult s = sweep_threshold(100.0, grid(-110.0, -30.0, 10.0), c);
    for (const SweepPoint &p : s.points) {
        EXPECT_EQ(p.metrics.femto_load, 0.0);
    }
}

TEST(ThresholdSweep, RejectsBadInput) {
    EXPECT_THROW(sweep_threshold(1300.0, grid(-90.0, -80.0, 1.0), small_config()), ConfigError);
    EXPECT_THROW(sweep_threshold(100.0, {-80.0, -90.0}, small_config()), ConfigError);
    EXPECT_THROW(sweep_threshold(100.0, {-120.0}, small_config()), ConfigError);
}

TEST(BalancedThreshold, ClampsAtCellEdgeForLargeRadii) {
    const ExperimentConfig c = small_config();
    for (double r : {900.0, 1000.0, 1100.0}) {
        const BalancedThreshold b = find_balanced_threshold(r, c, 0.1);
        EXPECT_TRUE(b.clamped) << r;
        EXPECT_NEAR(b.threshold, edge_rss(1200.0), 1e-9);
        EXPECT_NEAR(b.threshold, -95.08, 0.2);
    }
}

TEST(BalancedThreshold, DenseDeploymentFindsCrossing) {
    const ExperimentConfig c = small_config(400.0);
    const double tol = 0.1;
    const BalancedThreshold b = find_balanced_threshold(100.0, c, tol);
    ASSERT_FALSE(b.clamped);
    EXPECT_GT(b.threshold, b.lower_bound);
    EXPECT_LT(b.threshold, b.upper_bound);
    const ScenarioModel model(c, 100.0);
    const ChainMetrics below = model.solve(b.threshold - tol, c.policy);
    const ChainMetrics above = model.solve(b.threshold + tol, c.policy);
    EXPECT_GT(below.macro_load - below.femto_load, 0.0);
    EXPECT_LE(above.macro_load - above.femto_load, 0.0);
    EXPECT_LT(std::abs(b.macro_load - b.femto_load), 0.05);
    EXPECT_TRUE(b.warnings.empty());
}

TEST(BalancedThreshold, NonincreasingInRadius) {
    const ExperimentConfig c = small_config(200.0);
    const auto rows = calibrate_radii(grid(200.0, 1100.0, 100.0), c);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(rows[i].threshold, rows[i - 1].threshold + c.sweep.balance_tolerance_db)
            << rows[i].exclusion_radius;
    }
    EXPECT_TRUE(rows.back().clamped);
}

TEST(BalancedThreshold, RejectsBadInput) {
    EXPECT_THROW(find_balanced_threshold(1200.0, small_config(), 0.1), ConfigError);
    EXPECT_THROW(find_balanced_threshold(500.0, small_config(), 0.0), ConfigError);
}

TEST(RadiusSweep, PolicyOrderingAndMonotoneInRadius) {
    const std::vector<PolicyKind> policies{PolicyKind::Conventional, PolicyKind::SoftQoS,
                                           PolicyKind::HardQoS};
    const SweepResult s = sweep_R_handoff(grid(100.0, 1100.0, 100.0), policies, -70.0, small_config());
    ASSERT_EQ(s.points.size(), 33u);
    auto ho = [&](std::size_t r, std::size_t k) {
        return s.points[r * policies.size() + k].metrics.handoff_probability;
    };
    for (std::size_t r = 0; r < s.grid.size(); ++r) {
        EXPECT_EQ(s.points[r * 3].policy, PolicyKind::Conventional);
        EXPECT_LE(ho(r, 2), ho(r, 1) + 1e-12);
        EXPECT_LE(ho(r, 1), ho(r, 0) + 1e-12);
        if (r > 0) {
            for (std::size_t k = 0; k < 3; ++k) {
                EXPECT_LE(ho(r, k), ho(r - 1, k) + 1e-12) << "R=" << s.grid[r];
            }
        }
    }
}

TEST(LoadEnergySweep, OrderingsAndFlatConventionalEnergy) {
    const std::vector<PolicyKind> policies{PolicyKind::Conventional, PolicyKind::SoftQoS,
                                           PolicyKind::HardQoS};
    const EnergySweep s = sweep_load_energy({0.2, 0.4, 0.6, 0.8, 1.0}, policies, small_config());
    ASSERT_EQ(s.rows.size(), 15u);
    for (std::size_t i = 0; i < s.rho_grid.size(); ++i) {
        for (std::size_t k = 0; k < policies.size(); ++k) {
            const EnergyRow &row = s.at(i, k);
            EXPECT_FALSE(row.failed);
            EXPECT_NEAR(row.energy_conventional_kwh, 0.072, 1e-12);
            EXPECT_GE(row.savings_percent, 0.0);
            EXPECT_LE(row.savings_percent, 37.0 + 1e-9);
            if (i > 0) {
                EXPECT_LT(row.savings_percent, s.at(i - 1, k).savings_percent);
            }
        }
        EXPECT_GE(s.at(i, 2).savings_percent, s.at(i, 1).savings_percent);
        EXPECT_GE(s.at(i, 1).savings_percent, s.at(i, 0).savings_percent);
        EXPECT_GE(s.at(i, 2).domestic_profit_percent, s.at(i, 0).domestic_profit_percent);
    }
}

TEST(Reproducibility, IdenticalOutputForIdenticalConfig) {
    const ExperimentConfig c = small_config();
    std::ostringstream a;
    std::ostringstream b;
    write_sweep_csv(a, sweep_threshold(300.0, grid(-100.0, -60.0, 5.0), c), c);
    write_sweep_csv(b, sweep_threshold(300.0, grid(-100.0, -60.0, 5.0), c), c);
    EXPECT_EQ(a.str(), b.str());

    ExperimentConfig other = c;
    other.seed = 2;
    std::ostringstream d;
    write_sweep_csv(d, sweep_threshold(300.0, grid(-100.0, -60.0, 5.0), other), other);
    EXPECT_NE(a.str(), d.str());
}
