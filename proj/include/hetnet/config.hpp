#ifndef HETNET_CONFIG_HPP
#define HETNET_CONFIG_HPP

// Experiment configuration: one JSON object with a section per module.
// Every field is optional on input and defaults to the reference scenario;
// unknown keys are rejected with their full path.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctmc.hpp"
#include "deployment.hpp"
#include "des.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "policy.hpp"
#include "radio.hpp"

namespace hetnet {

/// Inclusive arithmetic grid start, start + step, ..., up to stop.
struct Grid {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const {
        if (!(step > 0.0) || !(stop >= start)) {
            throw ConfigError("grid: need step > 0 and stop >= start");
        }
        std::vector<double> out;
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i) {
            out.push_back(start + static_cast<double>(i) * step);
        }
        return out;
    }

    friend bool operator==(const Grid &, const Grid &) = default;
};

struct DeploymentConfig {
    double macro_radius = 1200.0;
    double exclusion_radius = 100.0;
    double femto_radius = 30.0;
    double femto_density_per_km2 = 20.0; // one femto per 0.05 km^2
    std::optional<std::size_t> femto_count; // overrides the density when set

    friend bool operator==(const DeploymentConfig &, const DeploymentConfig &) = default;
};

struct TrafficConfig {
    std::array<double, kNumClasses> lambda{0.2, 0.2, 0.2, 0.2};
    std::array<double, kNumClasses> mu{0.2, 0.2, 0.2, 0.2};
    Capacities capacities{3, 3, 3, 3};

    friend bool operator==(const TrafficConfig &, const TrafficConfig &) = default;
};

struct MonteCarloConfig {
    std::size_t samples = 100'000;

    friend bool operator==(const MonteCarloConfig &, const MonteCarloConfig &) = default;
};

struct EnergyConfig {
    EnergyParams params;
    // "aggregate" uses sum(lambda) / sum(mu); a class name uses that class's ratio.
    std::string rho_mode = "aggregate";

    friend bool operator==(const EnergyConfig &a, const EnergyConfig &b) {
        return a.params.p_active == b.params.p_active && a.params.p_idle == b.params.p_idle &&
               a.params.p_sniff == b.params.p_sniff && a.rho_mode == b.rho_mode;
    }
};

struct TariffConfig {
    TariffSchedule domestic = TariffSchedule::flat(TariffCategory::Domestic, 5.0);
    TariffSchedule commercial = TariffSchedule::flat(TariffCategory::Commercial, 7.5);
};

struct SolverConfig {
    SolverOptions options;
    std::uint64_t max_states = kDefaultMaxStates;
};

struct SweepConfig {
    Grid threshold_grid{-110.0, -30.0, 1.0};
    Grid radius_grid{200.0, 1100.0, 100.0};
    std::vector<double> rho_grid{0.2, 0.4, 0.6, 0.8, 1.0};
    double balance_tolerance_db = 0.1;
    double handoff_threshold = -70.0;
};

struct SimulationConfig {
    std::string arrivals = "exponential";
    double pareto_alpha = 1.5;
    double horizon = 700'000.0;
    double warmup_fraction = 0.1;
    std::size_t batches = 20;
    bool geometric = false;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    RadioParams radio;
    DeploymentConfig deployment;
    TrafficConfig traffic;
    Policy policy;
    VelocityModel velocity;
    MonteCarloConfig monte_carlo;
    EnergyConfig energy;
    TariffConfig tariff;
    SolverConfig solver;
    SweepConfig sweep;
    SimulationConfig simulation;

    void validate() const {
        radio.validate();
        policy.validate();
        velocity.validate();
        energy.params.validate();
        validate_capacities(traffic.capacities);
        tariff.domestic.validate();
        tariff.commercial.validate();
        if (!(deployment.macro_radius > 0.0) || !(deployment.exclusion_radius >= 0.0) ||
            !(deployment.exclusion_radius < deployment.macro_radius)) {
            throw ConfigError("deployment: need 0 <= exclusion_radius < macro_radius");
        }
        if (!(deployment.femto_radius > 0.0) || !(deployment.femto_density_per_km2 >= 0.0)) {
            throw ConfigError("deployment: femto_radius must be > 0 and density >= 0");
        }
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (!(traffic.lambda[c] > 0.0) || !(traffic.mu[c] > 0.0)) {
                throw ConfigError("traffic: rates must be > 0");
            }
        }
        if (monte_carlo.samples == 0) {
            throw ConfigError("monte_carlo.samples must be >= 1");
        }
        if (energy.rho_mode != "aggregate") {
            bool known = false;
            for (ServiceClass c : kAllClasses) {
                known = known || energy.rho_mode == to_string(c);
            }
            if (!known) {
                throw ConfigError("energy.rho_mode must be 'aggregate' or a class name");
            }
        }
        for (double thr : sweep.threshold_grid.values()) {
            if (thr < -110.0 || thr > -30.0) {
                throw ConfigError("sweep.threshold_grid must lie within [-110, -30] dBm");
            }
        }
        sweep.radius_grid.values();
        for (double rho : sweep.rho_grid) {
            if (!(rho > 0.0)) {
                throw ConfigError("sweep.rho_grid values must be > 0");
            }
        }
        if (!(sweep.balance_tolerance_db > 0.0)) {
            throw ConfigError("sweep.balance_tolerance_db must be > 0");
        }
        parse_arrival_kind(simulation.arrivals);
        if (!(simulation.warmup_fraction > 0.0 && simulation.warmup_fraction < 1.0)) {
            throw ConfigError("simulation.warmup_fraction must lie in (0, 1)");
        }
        if (!(solver.options.tolerance > 0.0)) {
            throw ConfigError("solver.tolerance must be > 0");
        }
    }

    TrafficModel traffic_model(const HandoffFraction &p_ho) const {
        TrafficModel t;
        t.lambda = traffic.lambda;
        t.mu = traffic.mu;
        t.p_ho = p_ho.probability;
        return t;
    }

    Deployment make_deployment(double exclusion_radius) const {
        const std::uint64_t dseed = detail::mix_seed(seed, 0);
        if (deployment.femto_count) {
            return deploy_femtos(dseed, deployment.macro_radius, exclusion_radius,
                                 *deployment.femto_count, deployment.femto_radius);
        }
        return deploy_femtos_by_density(dseed, deployment.macro_radius, exclusion_radius,
                                        deployment.femto_density_per_km2,
                                        deployment.femto_radius);
    }

    std::uint64_t monte_carlo_seed() const { return detail::mix_seed(seed, 1); }
    std::uint64_t simulation_seed() const { return detail::mix_seed(seed, 2); }
};

namespace detail {

/// Reads keys from one JSON object and rejects whatever is left unread.
class SectionReader {
  public:
    SectionReader(const nlohmann::json &j, std::string path) : m_json(j), m_path(std::move(path)) {
        if (!j.is_object()) {
            throw ConfigError(where() + ": expected an object");
        }
    }

    template <typename T>
    void read(const char *key, T &out) {
        m_seen.insert(key);
        if (!m_json.contains(key)) {
            return;
        }
        try {
            out = m_json.at(key).get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError(field(key) + ": " + e.what());
        }
    }

    const nlohmann::json *child(const char *key) {
        m_seen.insert(key);
        return m_json.contains(key) ? &m_json.at(key) : nullptr;
    }

    std::string field(const char *key) const { return where() + "." + key; }

    void finish() const {
        for (const auto &[key, value] : m_json.items()) {
            if (!m_seen.count(key)) {
                throw ConfigError(where() + ": unknown key '" + key + "'");
            }
        }
    }

  private:
    std::string where() const { return m_path.empty() ? "config" : m_path; }

    const nlohmann::json &m_json;
    std::string m_path;
    std::set<std::string> m_seen;
};

inline Grid read_grid(const nlohmann::json &j, const std::string &path, Grid grid) {
    SectionReader r(j, path);
    r.read("start", grid.start);
    r.read("stop", grid.stop);
    r.read("step", grid.step);
    r.finish();
    return grid;
}

inline nlohmann::json grid_json(const Grid &g) {
    return {{"start", g.start}, {"stop", g.stop}, {"step", g.step}};
}

} // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["radio"] = {{"macro_tx_power", c.radio.macro_tx_power},
                  {"femto_tx_power", c.radio.femto_tx_power},
                  {"wall_loss", c.radio.wall_loss},
                  {"hysteresis", c.radio.hysteresis},
                  {"macro_rss_threshold", c.radio.macro_rss_threshold}};
    j["deployment"] = {{"macro_radius", c.deployment.macro_radius},
                       {"exclusion_radius", c.deployment.exclusion_radius},
                       {"femto_radius", c.deployment.femto_radius},
                       {"femto_density_per_km2", c.deployment.femto_density_per_km2},
                       {"femto_count", c.deployment.femto_count
                                           ? nlohmann::json(*c.deployment.femto_count)
                                           : nlohmann::json(nullptr)}};
    j["traffic"] = {{"lambda", c.traffic.lambda},
                    {"mu", c.traffic.mu},
                    {"capacities", c.traffic.capacities}};
    j["policy"] = {{"kind", std::string(to_string(c.policy.kind))},
                   {"velocity_threshold", c.policy.velocity_threshold}};
    j["velocity"] = {{"max_kmh", c.velocity.max_kmh}};
    j["monte_carlo"] = {{"samples", c.monte_carlo.samples}};
    j["energy"] = {{"p_active", c.energy.params.p_active},
                   {"p_idle", c.energy.params.p_idle},
                   {"p_sniff", c.energy.params.p_sniff},
                   {"rho_mode", c.energy.rho_mode}};
    nlohmann::json dom;
    nlohmann::json com;
    to_json(dom, c.tariff.domestic);
    to_json(com, c.tariff.commercial);
    j["tariff"] = {{"domestic", dom}, {"commercial", com}};
    j["solver"] = {{"tolerance", c.solver.options.tolerance},
                   {"direct_limit", c.solver.options.direct_limit},
                   {"max_iterations", c.solver.options.max_iterations},
                   {"max_states", c.solver.max_states}};
    j["sweep"] = {{"threshold_grid", detail::grid_json(c.sweep.threshold_grid)},
                  {"radius_grid", detail::grid_json(c.sweep.radius_grid)},
                  {"rho_grid", c.sweep.rho_grid},
                  {"balance_tolerance_db", c.sweep.balance_tolerance_db},
                  {"handoff_threshold", c.sweep.handoff_threshold}};
    j["simulation"] = {{"arrivals", c.simulation.arrivals},
                       {"pareto_alpha", c.simulation.pareto_alpha},
                       {"horizon", c.simulation.horizon},
                       {"warmup_fraction", c.simulation.warmup_fraction},
                       {"batches", c.simulation.batches},
                       {"geometric", c.simulation.geometric}};
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json &j) {
    using detail::SectionReader;
    ExperimentConfig c;
    SectionReader top(j, "");
    top.read("seed", c.seed);
    if (const auto *s = top.child("radio")) {
        SectionReader r(*s, "radio");
        r.read("macro_tx_power", c.radio.macro_tx_power);
        r.read("femto_tx_power", c.radio.femto_tx_power);
        r.read("wall_loss", c.radio.wall_loss);
        r.read("hysteresis", c.radio.hysteresis);
        r.read("macro_rss_threshold", c.radio.macro_rss_threshold);
        r.finish();
    }
    if (const auto *s = top.child("deployment")) {
        SectionReader r(*s, "deployment");
        r.read("macro_radius", c.deployment.macro_radius);
        r.read("exclusion_radius", c.deployment.exclusion_radius);
        r.read("femto_radius", c.deployment.femto_radius);
        r.read("femto_density_per_km2", c.deployment.femto_density_per_km2);
        if (const auto *count = r.child("femto_count"); count && !count->is_null()) {
            if (!count->is_number_unsigned()) {
                throw ConfigError(r.field("femto_count") + ": expected a non-negative integer or null");
            }
            c.deployment.femto_count = count->get<std::size_t>();
        }
        r.finish();
    }
    if (const auto *s = top.child("traffic")) {
        SectionReader r(*s, "traffic");
        r.read("lambda", c.traffic.lambda);
        r.read("mu", c.traffic.mu);
        r.read("capacities", c.traffic.capacities);
        r.finish();
    }
    if (const auto *s = top.child("policy")) {
        SectionReader r(*s, "policy");
        std::string kind(to_string(c.policy.kind));
        r.read("kind", kind);
        c.policy.kind = parse_policy_kind(kind);
        r.read("velocity_threshold", c.policy.velocity_threshold);
        r.finish();
    }
    if (const auto *s = top.child("velocity")) {
        SectionReader r(*s, "velocity");
        r.read("max_kmh", c.velocity.max_kmh);
        r.finish();
    }
    if (const auto *s = top.child("monte_carlo")) {
        SectionReader r(*s, "monte_carlo");
        r.read("samples", c.monte_carlo.samples);
        r.finish();
    }
    if (const auto *s = top.child("energy")) {
        SectionReader r(*s, "energy");
        r.read("p_active", c.energy.params.p_active);
        r.read("p_idle", c.energy.params.p_idle);
        r.read("p_sniff", c.energy.params.p_sniff);
        r.read("rho_mode", c.energy.rho_mode);
        r.finish();
    }
    if (const auto *s = top.child("tariff")) {
        SectionReader r(*s, "tariff");
        if (const auto *d = r.child("domestic")) {
            c.tariff.domestic = tariff_from_json(*d, TariffCategory::Domestic);
        }
        if (const auto *m = r.child("commercial")) {
            c.tariff.commercial = tariff_from_json(*m, TariffCategory::Commercial);
        }
        r.finish();
    }
    if (const auto *s = top.child("solver")) {
        SectionReader r(*s, "solver");
        r.read("tolerance", c.solver.options.tolerance);
        r.read("direct_limit", c.solver.options.direct_limit);
        r.read("max_iterations", c.solver.options.max_iterations);
        r.read("max_states", c.solver.max_states);
        r.finish();
    }
    if (const auto *s = top.child("sweep")) {
        SectionReader r(*s, "sweep");
        if (const auto *g = r.child("threshold_grid")) {
            c.sweep.threshold_grid = detail::read_grid(*g, "sweep.threshold_grid", c.sweep.threshold_grid);
        }
        if (const auto *g = r.child("radius_grid")) {
            c.sweep.radius_grid = detail::read_grid(*g, "sweep.radius_grid", c.sweep.radius_grid);
        }
        r.read("rho_grid", c.sweep.rho_grid);
        r.read("balance_tolerance_db", c.sweep.balance_tolerance_db);
        r.read("handoff_threshold", c.sweep.handoff_threshold);
        r.finish();
    }
    if (const auto *s = top.child("simulation")) {
        SectionReader r(*s, "simulation");
        r.read("arrivals", c.simulation.arrivals);
        r.read("pareto_alpha", c.simulation.pareto_alpha);
        r.read("horizon", c.simulation.horizon);
        r.read("warmup_fraction", c.simulation.warmup_fraction);
        r.read("batches", c.simulation.batches);
        r.read("geometric", c.simulation.geometric);
        r.finish();
    }
    top.finish();
    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigError &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline TariffSchedule load_tariff(const std::string &path, TariffCategory category) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("tariff: cannot open '" + path + "'");
    }
    try {
        return tariff_from_json(nlohmann::json::parse(in), category);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const ConfigError &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace hetnet

#endif
