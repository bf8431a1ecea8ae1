#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <hetnet/radio.hpp>

using namespace hetnet;

TEST(Pathloss, MacroReferenceValues) {
    EXPECT_DOUBLE_EQ(macro_pathloss(1.0), 25.3);
    EXPECT_NEAR(macro_pathloss(100.0), 100.5, 1e-12);
    EXPECT_NEAR(macro_pathloss(1200.0), 141.08, 0.01);
}

TEST(Pathloss, FemtoReferenceValues) {
    EXPECT_NEAR(femto_pathloss(1.0), 39.16, 1e-12);
    EXPECT_NEAR(femto_pathloss(10.0), 65.46, 1e-12);
    EXPECT_NEAR(femto_pathloss(30.0), 89.0, 0.01);
}

TEST(Pathloss, RejectsNonPositiveDistance) {
    EXPECT_THROW(macro_pathloss(0.0), std::domain_error);
    EXPECT_THROW(macro_pathloss(-5.0), std::domain_error);
    EXPECT_THROW(femto_pathloss(0.0), std::domain_error);
    EXPECT_THROW(rss_macro(RadioParams{}, -1.0), std::domain_error);
    EXPECT_THROW(rss_femto(RadioParams{}, 0.0), std::domain_error);
}

TEST(Rss, ReferenceValues) {
    const RadioParams p;
    EXPECT_NEAR(rss_macro(p, 1200.0), -95.08, 0.1);
    EXPECT_NEAR(rss_macro(p, 100.0), -54.5, 1e-12);
    EXPECT_NEAR(rss_macro(p, 1.0), 20.7, 1e-12);
    EXPECT_NEAR(rss_femto(p, 1.0), -19.16, 1e-12);
    EXPECT_NEAR(rss_femto(p, 30.0), -69.0, 0.01);
    EXPECT_NEAR(rss_femto(p, 10.0), -45.46, 1e-12);
}

TEST(Rss, MonotoneAndRoundTrip) {
    const RadioParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.1, 5000.0);
    for (int i = 0; i < 2000; ++i) {
        double d1 = dist(rng);
        double d2 = dist(rng);
        if (d1 == d2) {
            continue;
        }
        if (d1 > d2) {
            std::swap(d1, d2);
        }
        EXPECT_GT(macro_pathloss(d2), macro_pathloss(d1));
        EXPECT_GT(femto_pathloss(d2), femto_pathloss(d1));
        EXPECT_LT(rss_macro(p, d2), rss_macro(p, d1));
        EXPECT_NEAR(rss_macro(p, d1) + macro_pathloss(d1), p.macro_tx_power, 1e-12);
        EXPECT_NEAR(rss_femto(p, d1) + femto_pathloss(d1), p.femto_tx_power, 1e-12);
    }
}

TEST(HandoffTrigger, BothClausesRequired) {
    RadioParams p;
    p.macro_rss_threshold = -70.0;
    p.hysteresis = 0.0;
    EXPECT_TRUE(handoff_trigger(p, -80.0, -60.0));
    // Threshold clause fails.
    EXPECT_FALSE(handoff_trigger(p, -60.0, -40.0));
    // Comparison clause fails while threshold clause holds.
    EXPECT_FALSE(handoff_trigger(p, -80.0, -85.0));
    EXPECT_FALSE(handoff_trigger(p, -80.0, -80.0));
    // Threshold is strict.
    EXPECT_FALSE(handoff_trigger(p, -70.0, -10.0));
}

TEST(HandoffTrigger, Hysteresis) {
    RadioParams p;
    p.macro_rss_threshold = -70.0;
    p.hysteresis = 5.0;
    EXPECT_FALSE(handoff_trigger(p, -80.0, -77.0));
    EXPECT_FALSE(handoff_trigger(p, -80.0, -75.0));
    EXPECT_TRUE(handoff_trigger(p, -80.0, -74.9));
}

TEST(HandoffTrigger, CommonOffsetOnlyMattersThroughThreshold) {
    RadioParams p;
    p.macro_rss_threshold = -70.0;
    // Shifting both by +20 pushes rss_m across the threshold.
    EXPECT_TRUE(handoff_trigger(p, -80.0, -60.0));
    EXPECT_FALSE(handoff_trigger(p, -60.0, -40.0));
    // Shifting within the threshold region keeps the decision.
    EXPECT_TRUE(handoff_trigger(p, -90.0, -70.0));
}

TEST(Radio, CrossoverRegionExistsBeyondExclusionRadius) {
    const RadioParams p;
    // A user 1000 m out, 20 m from a femto.
    const double rss_m = rss_macro(p, 1000.0);
    const double rss_f = rss_femto(p, 20.0);
    EXPECT_LT(rss_m, -70.0);
    EXPECT_TRUE(handoff_trigger(p, rss_m, rss_f));
}

TEST(Radio, ValidateRejectsBadParams) {
    RadioParams p;
    p.femto_tx_power = 50.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = RadioParams{};
    p.wall_loss = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = RadioParams{};
    p.hysteresis = -0.5;
    EXPECT_THROW(p.validate(), ConfigError);
    EXPECT_NO_THROW(RadioParams{}.validate());
}
