#ifndef HETNET_CALIBRATION_HPP
#define HETNET_CALIBRATION_HPP

// Threshold / radius / load sweeps and the balanced-threshold search.
//
// For a given exclusion radius the user geometry is sampled once
// (ScenarioModel) and reused for every threshold and policy, so femto
// assignment probabilities, and with them ML - FL, move monotonically with
// the threshold. Bisection on that function is then well defined.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "ctmc.hpp"
#include "deployment.hpp"
#include "detail/parallel.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "policy.hpp"
#include "radio.hpp"

namespace hetnet {

class ScenarioModel {
  public:
    ScenarioModel(const ExperimentConfig &config, double exclusion_radius)
        : m_config(config), m_deployment(config.make_deployment(exclusion_radius)),
          m_samples(m_deployment, config.radio, config.velocity, config.monte_carlo.samples,
                    config.monte_carlo_seed()) {}

    const Deployment &deployment() const { return m_deployment; }
    const ExperimentConfig &config() const { return m_config; }

    HandoffFraction handoff_fraction(double threshold, const Policy &policy) const {
        RadioParams radio = m_config.radio;
        radio.macro_rss_threshold = threshold;
        return m_samples.fraction(radio, policy);
    }

    ChainMetrics solve(const TrafficModel &traffic, PolicyKind policy) const {
        return solve_chain(m_config.traffic.capacities, policy, traffic, m_config.solver.options,
                           m_config.solver.max_states);
    }

    ChainMetrics solve(double threshold, const Policy &policy) const {
        return solve(m_config.traffic_model(handoff_fraction(threshold, policy)), policy.kind);
    }

  private:
    ExperimentConfig m_config;
    Deployment m_deployment;
    HandoffSampleSet m_samples;
};

struct SweepPoint {
    double x = 0.0; // value of the swept variable
    double exclusion_radius = 0.0;
    double threshold = 0.0;
    PolicyKind policy = PolicyKind::Conventional;
    HandoffFraction p_ho;
    ChainMetrics metrics;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::string kind;     // threshold | radius
    std::string variable; // column name of x
    std::vector<double> grid;
    std::vector<SweepPoint> points;
    nlohmann::json metadata;
};

namespace detail {

inline void require_strictly_increasing(const std::vector<double> &grid, const char *what) {
    if (grid.empty()) {
        throw ConfigError(std::string(what) + ": grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError(std::string(what) + ": grid must be strictly increasing");
        }
    }
}

inline void require_radius(const ExperimentConfig &config, double r) {
    if (!(r > 0.0) || !(r < config.deployment.macro_radius)) {
        throw ConfigError("exclusion radius R=" + std::to_string(r) +
                          " must lie in (0, macro_radius)");
    }
}

inline void solve_point(const ScenarioModel &model, SweepPoint &point, const Policy &policy) {
    try {
        point.p_ho = model.handoff_fraction(point.threshold, policy);
        point.metrics = model.solve(model.config().traffic_model(point.p_ho), policy.kind);
    } catch (const SolverError &e) {
        point.failed = true;
        point.error = e.what();
    }
}

} // namespace detail

/// ML / FL as the macro RSS threshold varies, at fixed exclusion radius.
inline SweepResult sweep_threshold(double exclusion_radius, const std::vector<double> &grid,
                                   const ExperimentConfig &config) {
    detail::require_radius(config, exclusion_radius);
    detail::require_strictly_increasing(grid, "sweep_threshold");
    for (double thr : grid) {
        if (thr < -110.0 || thr > -30.0) {
            throw ConfigError("sweep_threshold: thresholds must lie within [-110, -30] dBm");
        }
    }
    const ScenarioModel model(config, exclusion_radius);
    SweepResult out;
    out.kind = "threshold";
    out.variable = "threshold_dbm";
    out.grid = grid;
    out.points.resize(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        SweepPoint &p = out.points[i];
        p.x = grid[i];
        p.exclusion_radius = exclusion_radius;
        p.threshold = grid[i];
        p.policy = config.policy.kind;
        detail::solve_point(model, p, config.policy);
    });
    out.metadata = {{"exclusion_radius", exclusion_radius},
                    {"femto_count", model.deployment().femto_positions.size()},
                    {"policy", std::string(to_string(config.policy.kind))}};
    return out;
}

struct BalancedThreshold {
    double exclusion_radius = 0.0;
    double threshold = 0.0; // dBm
    bool clamped = false;
    double lower_bound = 0.0; // RSS at the macro cell edge
    double upper_bound = 0.0; // RSS at distance R
    double macro_load = 0.0;
    double femto_load = 0.0;
    std::size_t evaluations = 0;
    std::size_t femto_count = 0;
    std::vector<std::string> warnings;
};

/// Threshold at which macro and femto load cross, by bisection between the
/// cell-edge RSS and the RSS at distance R. If the femto load never reaches
/// the macro load in that range, the cell-edge RSS is returned with
/// \c clamped set.
inline BalancedThreshold find_balanced_threshold(double exclusion_radius,
                                                 const ExperimentConfig &config,
                                                 double tol_db) {
    if (!(tol_db > 0.0)) {
        throw ConfigError("find_balanced_threshold: tolerance must be > 0");
    }
    detail::require_radius(config, exclusion_radius);
    const ScenarioModel model(config, exclusion_radius);

    BalancedThreshold out;
    out.exclusion_radius = exclusion_radius;
    out.femto_count = model.deployment().femto_positions.size();
    out.lower_bound = rss_macro(config.radio, config.deployment.macro_radius);
    out.upper_bound = rss_macro(config.radio, exclusion_radius);

    struct Eval {
        double g;
        ChainMetrics m;
    };
    auto evaluate = [&](double thr) {
        ++out.evaluations;
        const ChainMetrics m = model.solve(thr, config.policy);
        return Eval{m.macro_load - m.femto_load, m};
    };

    Eval lo = evaluate(out.lower_bound);
    Eval hi = evaluate(out.upper_bound);
    double lo_thr = out.lower_bound;
    double hi_thr = out.upper_bound;
    if (hi.g > 0.0 || lo.g <= 0.0) {
        // No sign change: the femtos cannot carry as much load as the macro.
        out.clamped = true;
        out.threshold = out.lower_bound;
        out.macro_load = lo.m.macro_load;
        out.femto_load = lo.m.femto_load;
        if (lo.g <= 0.0) {
            out.warnings.push_back("macro load does not exceed femto load at the cell-edge RSS");
        }
        return out;
    }
    while (hi_thr - lo_thr > tol_db) {
        const double mid = 0.5 * (lo_thr + hi_thr);
        const Eval e = evaluate(mid);
        // g must be nonincreasing in the threshold.
        if (e.g > lo.g + 1e-12 || e.g < hi.g - 1e-12) {
            out.warnings.push_back("non-monotone ML - FL at " + std::to_string(mid) +
                                   " dBm: g=" + std::to_string(e.g) + " outside [" +
                                   std::to_string(hi.g) + ", " + std::to_string(lo.g) + "]");
        }
        if (e.g > 0.0) {
            lo_thr = mid;
            lo = e;
        } else {
            hi_thr = mid;
            hi = e;
        }
    }
    out.threshold = 0.5 * (lo_thr + hi_thr);
    const Eval at = evaluate(out.threshold);
    out.macro_load = at.m.macro_load;
    out.femto_load = at.m.femto_load;
    return out;
}

/// Balanced threshold for each exclusion radius in \p radii (independent tasks).
inline std::vector<BalancedThreshold> calibrate_radii(const std::vector<double> &radii,
                                                      const ExperimentConfig &config) {
    std::vector<BalancedThreshold> out(radii.size());
    detail::parallel_for(radii.size(), [&](std::size_t i) {
        out[i] = find_balanced_threshold(radii[i], config, config.sweep.balance_tolerance_db);
    });
    return out;
}

/// Expected femto-resident count per policy as the exclusion radius varies.
inline SweepResult sweep_R_handoff(const std::vector<double> &radii,
                                   const std::vector<PolicyKind> &policies, double threshold,
                                   const ExperimentConfig &config) {
    detail::require_strictly_increasing(radii, "sweep_R_handoff");
    for (double r : radii) {
        detail::require_radius(config, r);
    }
    if (threshold < -110.0 || threshold > -30.0) {
        throw ConfigError("sweep_R_handoff: threshold must lie within [-110, -30] dBm");
    }
    SweepResult out;
    out.kind = "radius";
    out.variable = "exclusion_radius_m";
    out.grid = radii;
    out.points.resize(radii.size() * policies.size());
    std::vector<std::size_t> femto_counts(radii.size());
    detail::parallel_for(radii.size(), [&](std::size_t i) {
        const ScenarioModel model(config, radii[i]);
        femto_counts[i] = model.deployment().femto_positions.size();
        for (std::size_t k = 0; k < policies.size(); ++k) {
            SweepPoint &p = out.points[i * policies.size() + k];
            p.x = radii[i];
            p.exclusion_radius = radii[i];
            p.threshold = threshold;
            p.policy = policies[k];
            Policy policy = config.policy;
            policy.kind = policies[k];
            detail::solve_point(model, p, policy);
        }
    });
    out.metadata = {{"threshold", threshold}, {"femto_count", femto_counts}};
    return out;
}

struct EnergyRow {
    double rho = 0.0;
    PolicyKind policy = PolicyKind::Conventional;
    double handoff_probability = 0.0;
    ActiveProbability prob_active;
    double energy_active_idle_kwh = 0.0;
    double energy_conventional_kwh = 0.0;
    double energy_active_idle_mws = 0.0;
    double energy_conventional_mws = 0.0;
    double savings_percent = 0.0;
    double domestic_cost_active_idle = 0.0;
    double domestic_cost_conventional = 0.0;
    double domestic_profit_percent = 0.0;
    double commercial_cost_active_idle = 0.0;
    double commercial_cost_conventional = 0.0;
    double commercial_profit_percent = 0.0;
    bool failed = false;
    std::string error;
};

struct EnergySweep {
    std::vector<double> rho_grid;
    std::vector<PolicyKind> policies;
    std::vector<EnergyRow> rows; // rho-major, then policy
    nlohmann::json metadata;

    const EnergyRow &at(std::size_t rho_index, std::size_t policy_index) const {
        return rows[rho_index * policies.size() + policy_index];
    }
};

inline double profit_percent(double cost, double baseline) {
    return baseline > 0.0 ? 100.0 * (1.0 - cost / baseline) : 0.0;
}

/// Offered load fed into the active-probability formula.
inline double energy_rho(const TrafficModel &traffic, const std::string &mode) {
    if (mode == "aggregate") {
        return traffic.rho();
    }
    for (ServiceClass c : kAllClasses) {
        if (mode == to_string(c)) {
            return traffic.lambda[index_of(c)] / traffic.mu[index_of(c)];
        }
    }
    throw ConfigError("energy: unknown rho_mode '" + mode + "'");
}

/// Per offered load and policy: femto energy with and without active/idle
/// switching, savings and tariff costs. Arrival rates are rho * mu per class;
/// the geometry is the configured exclusion radius and RSS threshold.
inline EnergySweep sweep_load_energy(const std::vector<double> &rho_grid,
                                     const std::vector<PolicyKind> &policies,
                                     const ExperimentConfig &config) {
    for (double rho : rho_grid) {
        if (!(rho > 0.0)) {
            throw ConfigError("sweep_load_energy: rho values must be > 0");
        }
    }
    config.energy.params.validate();
    const ScenarioModel model(config, config.deployment.exclusion_radius);
    EnergySweep out;
    out.rho_grid = rho_grid;
    out.policies = policies;
    out.rows.resize(rho_grid.size() * policies.size());
    const double e_conv = monthly_energy_conventional(config.energy.params);
    const double dom_conv = monthly_cost(e_conv, config.tariff.domestic);
    const double com_conv = monthly_cost(e_conv, config.tariff.commercial);
    detail::parallel_for(out.rows.size(), [&](std::size_t i) {
        EnergyRow &row = out.rows[i];
        row.rho = rho_grid[i / policies.size()];
        row.policy = policies[i % policies.size()];
        Policy policy = config.policy;
        policy.kind = row.policy;
        TrafficModel traffic =
            config.traffic_model(model.handoff_fraction(config.radio.macro_rss_threshold, policy));
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            traffic.lambda[c] = row.rho * traffic.mu[c];
        }
        try {
            row.handoff_probability = model.solve(traffic, row.policy).handoff_probability;
        } catch (const SolverError &e) {
            row.failed = true;
            row.error = e.what();
            return;
        }
        row.prob_active = prob_active(energy_rho(traffic, config.energy.rho_mode),
                                      row.handoff_probability);
        const EnergyParams &ep = config.energy.params;
        row.energy_active_idle_kwh = monthly_energy_active_idle(ep, row.prob_active.value);
        row.energy_conventional_kwh = e_conv;
        row.energy_active_idle_mws = monthly_energy_active_idle_mws(ep, row.prob_active.value);
        row.energy_conventional_mws = monthly_energy_conventional_mws(ep);
        row.savings_percent = savings_percent(row.energy_active_idle_kwh, e_conv);
        row.domestic_cost_active_idle = monthly_cost(row.energy_active_idle_kwh, config.tariff.domestic);
        row.domestic_cost_conventional = dom_conv;
        row.domestic_profit_percent = profit_percent(row.domestic_cost_active_idle, dom_conv);
        row.commercial_cost_active_idle =
            monthly_cost(row.energy_active_idle_kwh, config.tariff.commercial);
        row.commercial_cost_conventional = com_conv;
        row.commercial_profit_percent = profit_percent(row.commercial_cost_active_idle, com_conv);
    });
    out.metadata = {{"exclusion_radius", config.deployment.exclusion_radius},
                    {"threshold", config.radio.macro_rss_threshold},
                    {"femto_count", model.deployment().femto_positions.size()},
                    {"max_savings_percent", max_savings_percent(config.energy.params)}};
    return out;
}

/// Published balanced thresholds (dBm) by exclusion radius (m), used only for
/// side-by-side reporting.
inline const std::map<int, double> &reference_balanced_thresholds() {
    static const std::map<int, double> table = {
        {200, -85.7}, {300, -87.1}, {400, -88.6}, {500, -89.8}, {600, -90.9},
        {700, -92.1}, {800, -93.8}, {900, -95.0}, {1000, -95.0}, {1100, -95.0}};
    return table;
}

/// Published savings percentages by load 0.2..1.0: plain active/idle, soft, hard.
inline const std::array<std::array<double, 5>, 3> &reference_savings_percent() {
    static const std::array<std::array<double, 5>, 3> table = {{
        {47.81, 43.70, 40.33, 37.58, 35.32},
        {85.06, 83.88, 82.92, 82.13, 81.48},
        {92.76, 92.19, 91.72, 91.34, 91.03},
    }};
    return table;
}

} // namespace hetnet

#endif
