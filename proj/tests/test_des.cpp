#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <hetnet/ctmc.hpp>
#include <hetnet/des.hpp>

using namespace hetnet;

namespace {

SimConfig desk_config(double p_ho, double horizon) {
    SimConfig cfg;
    cfg.capacities = {3, 3, 3, 3};
    cfg.traffic = TrafficModel::symmetric(0.2, 0.2, p_ho);
    cfg.horizon = horizon;
    cfg.warmup = 0.1 * horizon;
    return cfg;
}

void expect_agrees(const Estimate &sim, double exact, const char *what) {
    const bool close = std::abs(sim.mean - exact) <= 0.02 * std::abs(exact);
    EXPECT_TRUE(close || sim.overlaps(exact))
        << what << ": sim " << sim.mean << " +- " << sim.half_width << " vs ctmc " << exact;
}

} // namespace

TEST(Pareto, SampleMeanAndSupport) {
    const ParetoSampler sampler(1.5, 5.0);
    EXPECT_NEAR(sampler.scale(), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(sampler.mean(), 5.0, 1e-12);
    std::mt19937_64 rng(7);
    double sum = 0.0;
    double smallest = 1e300;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const double x = sampler(rng);
        sum += x;
        smallest = std::min(smallest, x);
    }
    EXPECT_NEAR(sum / n, 5.0, 0.2);
    EXPECT_GE(smallest, 5.0 / 3.0);
}

TEST(Pareto, DeterministicStream) {
    const ParetoSampler sampler(2.5, 1.0);
    std::mt19937_64 a(99);
    std::mt19937_64 b(99);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(sampler(a), sampler(b));
    }
}

TEST(Pareto, RejectsInfiniteMean) {
    EXPECT_THROW(ParetoSampler(1.0, 5.0), ConfigError);
    EXPECT_THROW(ParetoSampler(0.9, 5.0), ConfigError);
    EXPECT_THROW(ParetoSampler(1.5, 0.0), ConfigError);
    SimConfig cfg = desk_config(0.3, 1e4);
    cfg.arrivals = ArrivalKind::Pareto;
    cfg.pareto_alpha = 0.9;
    EXPECT_THROW(simulate(cfg, 1), ConfigError);
}

TEST(Simulate, RejectsBadWindow) {
    SimConfig cfg = desk_config(0.3, 1e4);
    cfg.warmup = 1e4;
    EXPECT_THROW(simulate(cfg, 1), ConfigError);
    cfg.warmup = 0.0;
    EXPECT_THROW(simulate(cfg, 1), ConfigError);
    cfg.warmup = 1e3;
    cfg.batches = 10;
    EXPECT_THROW(simulate(cfg, 1), ConfigError);
}

TEST(Simulate, Deterministic) {
    const SimConfig cfg = desk_config(0.4, 2e4);
    const SimStats a = simulate(cfg, 42);
    const SimStats b = simulate(cfg, 42);
    EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
    const SimStats c = simulate(cfg, 43);
    EXPECT_NE(nlohmann::json(a).dump(), nlohmann::json(c).dump());
}

TEST(Simulate, NoHandoffMeansNoFemtoLoad) {
    const SimStats s = simulate(desk_config(0.0, 5e4), 3);
    EXPECT_EQ(s.femto_load.mean, 0.0);
    EXPECT_EQ(s.femto_load.half_width, 0.0);
    EXPECT_EQ(s.mean_n_h.mean, 0.0);
    for (auto h : s.handed_off) {
        EXPECT_EQ(h, 0u);
    }
}

TEST(Simulate, VanishingLoadLeavesSystemEmpty) {
    SimConfig cfg = desk_config(0.5, 1e5);
    cfg.traffic = TrafficModel::symmetric(1e-6, 0.2, 0.5);
    const SimStats s = simulate(cfg, 5);
    EXPECT_GT(s.empty_fraction.mean, 0.999);
}

TEST(Simulate, MatchesCtmcAtDeskScale) {
    const SimConfig cfg = desk_config(0.3, 7e5);
    const SimStats s = simulate(cfg, 11);
    EXPECT_GE(s.events, 1'000'000u);
    const ChainMetrics m = solve_chain(cfg.capacities, cfg.policy, cfg.traffic);
    expect_agrees(s.macro_load, m.macro_load, "ML");
    expect_agrees(s.femto_load, m.femto_load, "FL");
    expect_agrees(s.mean_n_h, m.handoff_probability, "E[n_h]");
    expect_agrees(s.empty_fraction, m.empty_probability, "empty");
}

TEST(Simulate, MatchesCtmcUnderHardPolicy) {
    SimConfig cfg = desk_config(0.0, 3e5);
    cfg.policy = PolicyKind::HardQoS;
    cfg.traffic.p_ho = {0.0, 0.0, 0.6, 0.6};
    const SimStats s = simulate(cfg, 12);
    const ChainMetrics m = solve_chain(cfg.capacities, cfg.policy, cfg.traffic);
    expect_agrees(s.femto_load, m.femto_load, "FL");
    expect_agrees(s.mean_n_h, m.handoff_probability, "E[n_h]");
}

TEST(Simulate, PerStateDistributionMatchesCtmc) {
    SimConfig cfg;
    cfg.capacities = {1, 1, 1, 1};
    cfg.traffic = TrafficModel::symmetric(0.2, 0.2, 0.5);
    cfg.horizon = 5e7;
    cfg.warmup = 5e6;
    cfg.record_states = true;
    const SimStats s = simulate(cfg, 21);

    const StateSpace space = build_state_space(cfg.capacities, cfg.policy);
    const SteadyState ss = solve_steady_state(build_generator(space, cfg.traffic));
    ASSERT_EQ(s.state_fraction.size(), space.size());
    double total = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CtmcState &st = space[i];
        const auto it = s.state_fraction.find({st.n[0], st.n[1], st.n[2], st.n[3], st.n_h});
        ASSERT_NE(it, s.state_fraction.end());
        EXPECT_NEAR(it->second, ss[i], 0.01 * ss[i]) << "state " << i;
        total += it->second;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Simulate, LittlesLaw) {
    const SimStats s = simulate(desk_config(0.3, 3e5), 8);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double predicted = s.admitted_rate[c] / 0.2;
        const Estimate &occ = s.class_occupancy[c];
        EXPECT_TRUE(occ.overlaps(predicted) || std::abs(occ.mean - predicted) < 0.01 * predicted)
            << "class " << c << ": " << occ.mean << " +- " << occ.half_width << " vs "
            << predicted;
    }
}

TEST(Simulate, GeometricAssignmentRespectsHardPolicy) {
    SimConfig cfg = desk_config(0.0, 5e4);
    cfg.policy = PolicyKind::HardQoS;
    GeometricAssignment g;
    g.deployment = deploy_femtos(5, 1200.0, 100.0, 800, 30.0);
    g.policy.kind = PolicyKind::HardQoS;
    cfg.geometry = g;
    const SimStats s = simulate(cfg, 2);
    EXPECT_EQ(s.handed_off[index_of(ServiceClass::UGS)], 0u);
    EXPECT_EQ(s.handed_off[index_of(ServiceClass::rtPS)], 0u);
    EXPECT_GT(s.handed_off[index_of(ServiceClass::nrtPS)] + s.handed_off[index_of(ServiceClass::BE)],
              0u);
}

TEST(Simulate, TraceIsLineDelimitedJson) {
    std::ostringstream trace;
    SimConfig cfg = desk_config(0.5, 200.0);
    cfg.warmup = 20.0;
    cfg.trace = &trace;
    const SimStats s = simulate(cfg, 4);
    std::istringstream in(trace.str());
    std::string line;
    std::uint64_t lines = 0;
    while (std::getline(in, line)) {
        const auto rec = nlohmann::json::parse(line);
        EXPECT_TRUE(rec.contains("t"));
        EXPECT_TRUE(rec.contains("event"));
        ++lines;
    }
    EXPECT_EQ(lines, s.events);
}

TEST(Simulate, ReplicationsIndependentOfThreadCount) {
    const SimConfig cfg = desk_config(0.3, 1e4);
    const auto reps = simulate_replications(cfg, 77, 3);
    ASSERT_EQ(reps.size(), 3u);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        EXPECT_EQ(nlohmann::json(reps[r]).dump(),
                  nlohmann::json(simulate(cfg, detail::mix_seed(77, r))).dump());
    }
}

TEST(Simulate, FemtoResidentCountFromDeploymentGeometry) {
    const Deployment d = deploy_femtos_by_density(17, 1200.0, 300.0, 60.0);
    RadioParams radio;
    radio.macro_rss_threshold = -80.0;
    const HandoffFraction p_ho =
        estimate_handoff_fraction(d, radio, Policy{}, VelocityModel{}, 50'000, 3);
    SimConfig cfg = desk_config(0.0, 2e6);
    cfg.traffic.p_ho = p_ho.probability;
    const SimStats s = simulate(cfg, 31);
    const ChainMetrics m = solve_chain(cfg.capacities, cfg.policy, cfg.traffic);
    ASSERT_GT(m.handoff_probability, 0.0);
    EXPECT_NEAR(s.mean_n_h.mean, m.handoff_probability, 0.02 * m.handoff_probability);
}
