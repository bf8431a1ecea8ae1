// hetnet: command-line front end for the macro/femto handoff toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <hetnet/hetnet.hpp>

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string policy;
    std::string format = "csv";
};

/// Accepts either a plain config or a manifest written by a previous run.
ExperimentConfig resolve_config(const GlobalOptions &g) {
    ExperimentConfig config;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) {
            throw ConfigError("cannot open config '" + g.config_path + "'");
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error &e) {
            throw ConfigError(g.config_path + ": " + e.what());
        }
        try {
            if (j.is_object() && j.contains("schema") && j.contains("config")) {
                config = config_from_json(j.at("config"));
            } else {
                config = config_from_json(j);
            }
        } catch (const ConfigError &e) {
            throw ConfigError(g.config_path + ": " + e.what());
        }
    }
    if (g.seed) {
        config.seed = *g.seed;
    }
    if (!g.policy.empty()) {
        config.policy.kind = parse_policy_kind(g.policy);
    }
    config.validate();
    return config;
}

std::string write_text(const GlobalOptions &g, const std::string &name, const std::string &text) {
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << text;
    return name;
}

void write_manifest(const GlobalOptions &g, const std::string &stem, const std::string &command,
                    const ExperimentConfig &config, const std::vector<std::string> &outputs,
                    nlohmann::json extra = nlohmann::json::object()) {
    write_text(g, stem + ".manifest.json",
               manifest_json(command, config, outputs, std::move(extra)).dump(2) + "\n");
}

std::vector<PolicyKind> all_policies() {
    return {PolicyKind::Conventional, PolicyKind::SoftQoS, PolicyKind::HardQoS};
}

int cmd_calibrate(const GlobalOptions &g, const std::vector<double> &radii_opt) {
    const ExperimentConfig config = resolve_config(g);
    const std::vector<double> radii =
        radii_opt.empty() ? config.sweep.radius_grid.values() : radii_opt;
    for (double r : radii) {
        if (!(r > 0.0) || !(r < config.deployment.macro_radius)) {
            throw ConfigError("R=" + std::to_string(r) + " must lie in (0, macro_radius=" +
                              std::to_string(config.deployment.macro_radius) + ")");
        }
    }
    const auto rows = calibrate_radii(radii, config);

    std::printf("%8s  %14s  %7s  %7s  %7s  %6s  %s\n", "R(m)", "balanced(dBm)", "clamped", "ML",
                "FL", "femtos", "reference(dBm)");
    const auto &ref = reference_balanced_thresholds();
    for (const auto &b : rows) {
        std::printf("%8.1f  %14.2f  %7s  %7.4f  %7.4f  %6zu", b.exclusion_radius, b.threshold,
                    b.clamped ? "yes" : "no", b.macro_load, b.femto_load, b.femto_count);
        if (auto it = ref.find(static_cast<int>(std::lround(b.exclusion_radius)));
            it != ref.end()) {
            std::printf("  %.1f (delta %+.2f)", it->second, b.threshold - it->second);
        }
        std::printf("\n");
        for (const auto &w : b.warnings) {
            std::fprintf(stderr, "warning: R=%g: %s\n", b.exclusion_radius, w.c_str());
        }
    }
    std::fflush(stdout);

    std::string name;
    if (g.format == "json") {
        name = write_text(g, "calibrate.json", calibration_json(rows).dump(2) + "\n");
    } else {
        std::ostringstream csv;
        write_calibration_csv(csv, rows, config);
        name = write_text(g, "calibrate.csv", csv.str());
    }
    write_manifest(g, "calibrate", "calibrate", config, {name}, {{"radii", radii}});
    return kExitOk;
}

int cmd_sweep(const GlobalOptions &g, const std::string &kind, std::optional<double> radius) {
    const ExperimentConfig config = resolve_config(g);
    std::string body;
    const std::string stem = "sweep_" + kind;
    if (kind == "threshold") {
        const double r = radius.value_or(config.deployment.exclusion_radius);
        const SweepResult s = sweep_threshold(r, config.sweep.threshold_grid.values(), config);
        if (g.format == "json") {
            body = sweep_json(s).dump(2) + "\n";
        } else {
            std::ostringstream csv;
            write_sweep_csv(csv, s, config);
            body = csv.str();
        }
        std::cout << "threshold sweep at R=" << r << " m: " << s.points.size() << " points\n";
    } else if (kind == "radius") {
        const SweepResult s = sweep_R_handoff(config.sweep.radius_grid.values(), all_policies(),
                                              config.sweep.handoff_threshold, config);
        if (g.format == "json") {
            body = sweep_json(s).dump(2) + "\n";
        } else {
            std::ostringstream csv;
            write_sweep_csv(csv, s, config);
            body = csv.str();
        }
        std::cout << "radius sweep at threshold " << config.sweep.handoff_threshold
                  << " dBm: " << s.points.size() << " points\n";
    } else if (kind == "load") {
        const EnergySweep s = sweep_load_energy(config.sweep.rho_grid, all_policies(), config);
        if (g.format == "json") {
            body = energy_json(s).dump(2) + "\n";
        } else {
            std::ostringstream csv;
            write_energy_csv(csv, s, config);
            body = csv.str();
        }
        std::cout << "load sweep: " << s.rows.size() << " rows\n";
    } else {
        throw ConfigError("unknown sweep kind '" + kind + "'");
    }
    const std::string name = write_text(g, stem + (g.format == "json" ? ".json" : ".csv"), body);
    write_manifest(g, stem, "sweep", config, {name}, {{"kind", kind}});
    std::cout << "wrote " << (fs::path(g.out_dir) / name).string() << '\n';
    return kExitOk;
}

struct SimulateOptions {
    std::optional<std::string> arrivals;
    std::optional<double> alpha;
    std::optional<double> horizon;
    std::optional<double> warmup;
    std::string trace_path;
};

int cmd_simulate(const GlobalOptions &g, const SimulateOptions &o) {
    ExperimentConfig config = resolve_config(g);
    if (o.arrivals) {
        config.simulation.arrivals = *o.arrivals;
    }
    if (o.alpha) {
        config.simulation.pareto_alpha = *o.alpha;
    }
    if (o.horizon) {
        config.simulation.horizon = *o.horizon;
    }
    config.validate();

    const ScenarioModel model(config, config.deployment.exclusion_radius);
    const HandoffFraction p_ho =
        model.handoff_fraction(config.radio.macro_rss_threshold, config.policy);

    SimConfig sim;
    sim.capacities = config.traffic.capacities;
    sim.traffic = config.traffic_model(p_ho);
    sim.policy = config.policy.kind;
    sim.arrivals = parse_arrival_kind(config.simulation.arrivals);
    sim.pareto_alpha = config.simulation.pareto_alpha;
    sim.horizon = config.simulation.horizon;
    sim.warmup = o.warmup.value_or(config.simulation.warmup_fraction * config.simulation.horizon);
    sim.batches = config.simulation.batches;
    if (config.simulation.geometric) {
        sim.geometry = GeometricAssignment{model.deployment(), config.radio, config.policy,
                                           config.velocity};
    }
    std::ofstream trace;
    if (!o.trace_path.empty()) {
        trace.open(o.trace_path);
        if (!trace) {
            throw ConfigError("cannot open trace file '" + o.trace_path + "'");
        }
        sim.trace = &trace;
    }
    const SimStats stats = simulate(sim, config.simulation_seed());

    nlohmann::json out;
    out["stats"] = stats;
    out["p_ho"] = p_ho.probability;
    out["arrivals"] = config.simulation.arrivals;

    std::cout << "events: " << stats.events << "\n";
    std::cout << "metric                         DES mean   +-95%      CTMC       delta%\n";
    std::optional<ChainMetrics> chain;
    const std::uint64_t states = count_states(config.traffic.capacities, config.policy.kind);
    if (states <= config.solver.options.direct_limit) {
        chain = model.solve(sim.traffic, config.policy.kind);
    }
    nlohmann::json comparison = nlohmann::json::array();
    auto row = [&](const char *name, const Estimate &e, std::optional<double> analytic) {
        std::cout << std::left << std::setw(30) << name << std::right << std::setw(10)
                  << std::setprecision(6) << std::fixed << e.mean << "  " << std::setw(9)
                  << e.half_width;
        nlohmann::json rec{{"metric", name}, {"des_mean", e.mean}, {"des_half_width_95", e.half_width}};
        if (analytic) {
            const double delta = *analytic != 0.0 ? 100.0 * (e.mean - *analytic) / *analytic : 0.0;
            std::cout << "  " << std::setw(9) << *analytic << "  " << std::setw(8)
                      << std::setprecision(3) << delta;
            rec["ctmc"] = *analytic;
            rec["delta_percent"] = delta;
        }
        std::cout << '\n';
        comparison.push_back(rec);
    };
    row("macro_load", stats.macro_load, chain ? std::optional(chain->macro_load) : std::nullopt);
    row("femto_load", stats.femto_load, chain ? std::optional(chain->femto_load) : std::nullopt);
    row("expected_femto_resident_count", stats.mean_n_h,
        chain ? std::optional(chain->handoff_probability) : std::nullopt);
    row("empty_fraction", stats.empty_fraction,
        chain ? std::optional(chain->empty_probability) : std::nullopt);
    std::cout.unsetf(std::ios::fixed);
    out["comparison"] = comparison;

    const std::string name = write_text(g, "simulate.json", out.dump(2) + "\n");
    write_manifest(g, "simulate", "simulate", config, {name}, {{"warmup", sim.warmup}});
    return kExitOk;
}

int cmd_energy(const GlobalOptions &g, const std::string &domestic, const std::string &commercial) {
    ExperimentConfig config = resolve_config(g);
    if (!domestic.empty()) {
        config.tariff.domestic = load_tariff(domestic, TariffCategory::Domestic);
    }
    if (!commercial.empty()) {
        config.tariff.commercial = load_tariff(commercial, TariffCategory::Commercial);
    }
    const EnergySweep s = sweep_load_energy(config.sweep.rho_grid, all_policies(), config);
    const double bound = max_savings_percent(config.energy.params);

    std::cout << "conventional (always-on) energy: "
              << monthly_energy_conventional(config.energy.params) << " kWh/month\n";
    std::cout << "savings upper bound (prob_active = 0): " << bound << " %\n";
    std::cout << "rho    policy        HO_Prob    P(active)  E_ai(kWh)   savings%  dom.profit%  com.profit%\n";
    for (const auto &r : s.rows) {
        std::cout << std::fixed << std::setprecision(1) << r.rho << "    " << std::left
                  << std::setw(12) << to_string(r.policy) << std::right << std::setprecision(5)
                  << "  " << r.handoff_probability << "    " << r.prob_active.value
                  << (r.prob_active.clamped ? "*" : " ") << "  " << r.energy_active_idle_kwh
                  << "  " << std::setprecision(3) << std::setw(8) << r.savings_percent << "  "
                  << std::setw(11) << r.domestic_profit_percent << "  " << std::setw(11)
                  << r.commercial_profit_percent << '\n';
    }
    std::cout.unsetf(std::ios::fixed);
    std::string name;
    if (g.format == "json") {
        name = write_text(g, "energy.json", energy_json(s).dump(2) + "\n");
    } else {
        std::ostringstream csv;
        write_energy_csv(csv, s, config);
        name = write_text(g, "energy.csv", csv.str());
    }
    write_manifest(g, "energy", "energy", config, {name});
    return kExitOk;
}

int cmd_report(const GlobalOptions &g) {
    const ExperimentConfig config = resolve_config(g);
    nlohmann::json report;
    std::ostringstream text;

    const double edge = rss_macro(config.radio, config.deployment.macro_radius);
    report["edge_rss_dbm"] = {{"computed", edge}, {"published", -95.0}, {"delta", edge + 95.0}};
    text << "cell-edge RSS at " << config.deployment.macro_radius << " m: " << edge
         << " dBm (published -95)\n";

    const double onset = rss_macro(config.radio, 100.0);
    report["saturation_onset_dbm"] = {
        {"computed", onset}, {"published", -50.0}, {"delta", onset + 50.0}};
    text << "saturation onset for R=100 m: analytic " << onset
         << " dBm vs published -50 dBm (delta " << onset + 50.0 << " dB)\n";

    const BalancedThreshold r100 = find_balanced_threshold(100.0, config, config.sweep.balance_tolerance_db);
    report["balanced_threshold_R100"] = {
        {"computed", r100.threshold}, {"clamped", r100.clamped}, {"published", -83.4}};
    text << "balanced threshold at R=100 m: " << r100.threshold << " dBm"
         << (r100.clamped ? " (clamped)" : "") << " vs published -83.4\n";

    const auto &ref = reference_balanced_thresholds();
    std::vector<double> radii;
    for (const auto &[r, v] : ref) {
        radii.push_back(r);
    }
    const auto rows = calibrate_radii(radii, config);
    nlohmann::json table = nlohmann::json::array();
    text << "balanced threshold vs published (+-3 dB band, informational):\n";
    for (const auto &b : rows) {
        const double published = ref.at(static_cast<int>(b.exclusion_radius));
        const bool within = std::abs(b.threshold - published) <= 3.0;
        table.push_back({{"R", b.exclusion_radius},
                         {"computed", b.threshold},
                         {"clamped", b.clamped},
                         {"published", published},
                         {"within_3db", within}});
        text << "  R=" << b.exclusion_radius << "  " << b.threshold << "  published " << published
             << (within ? "  within 3 dB" : "  OUTSIDE 3 dB") << '\n';
    }
    report["balanced_threshold_table"] = table;

    // The femto density is the main free parameter behind the table above.
    nlohmann::json sensitivity = nlohmann::json::array();
    text << "femto density sensitivity of the R=100 m balanced threshold:\n";
    for (double density : {config.deployment.femto_density_per_km2, 100.0, 200.0, 400.0}) {
        ExperimentConfig dense = config;
        dense.deployment.femto_density_per_km2 = density;
        dense.deployment.femto_count.reset();
        const BalancedThreshold b =
            find_balanced_threshold(100.0, dense, config.sweep.balance_tolerance_db);
        sensitivity.push_back({{"density_per_km2", density},
                               {"femto_count", b.femto_count},
                               {"threshold", b.threshold},
                               {"clamped", b.clamped}});
        text << "  " << density << " /km^2 (" << b.femto_count << " femtos): " << b.threshold
             << " dBm" << (b.clamped ? " (clamped)" : "") << '\n';
    }
    report["density_sensitivity_R100"] = sensitivity;

    const double bound = max_savings_percent(config.energy.params);
    double published_max = 0.0;
    for (const auto &row : reference_savings_percent()) {
        for (double v : row) {
            published_max = std::max(published_max, v);
        }
    }
    const bool reproducible = published_max <= bound;
    report["savings_bound"] = {{"analytic_max_percent", bound},
                               {"published_max_percent", published_max},
                               {"published_reproducible", reproducible}};
    text << "savings upper bound from the power figures: " << bound
         << " %; published savings reach " << published_max << " % -> "
         << (reproducible ? "consistent" : "NOT reproducible from the energy formulas") << '\n';

    std::cout << text.str();
    std::string name;
    if (g.format == "json") {
        name = write_text(g, "report.json", report.dump(2) + "\n");
    } else {
        name = write_text(g, "report.txt", text.str());
        write_text(g, "report.json", report.dump(2) + "\n");
    }
    write_manifest(g, "report", "report", config, {name});
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Macro/femto handoff, load balancing and femto energy toolkit"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config_path, "Experiment config (JSON) or a previous run's manifest");
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--policy", g.policy, "Handoff policy")
        ->check(CLI::IsMember({"conventional", "soft", "hard"}));
    app.add_option("--format", g.format, "Primary output format")
        ->check(CLI::IsMember({"csv", "json"}));

    std::vector<double> radii;
    auto *calibrate = app.add_subcommand("calibrate", "Balanced RSS threshold per exclusion radius");
    calibrate->add_option("-R,--radius", radii, "Exclusion radius in meters (repeatable)");

    std::string kind = "threshold";
    std::optional<double> sweep_radius;
    auto *sweep = app.add_subcommand("sweep", "Threshold, radius or load sweep");
    sweep->add_option("--kind", kind, "Sweep kind")
        ->check(CLI::IsMember({"threshold", "radius", "load"}));
    sweep->add_option("-R,--radius", sweep_radius, "Exclusion radius for a threshold sweep");

    SimulateOptions sim;
    auto *simulate_cmd = app.add_subcommand("simulate", "Discrete-event simulation vs CTMC");
    simulate_cmd->add_option("--arrivals", sim.arrivals, "exponential|pareto");
    simulate_cmd->add_option("--alpha", sim.alpha, "Pareto shape");
    simulate_cmd->add_option("--horizon", sim.horizon, "Simulated time horizon");
    simulate_cmd->add_option("--warmup", sim.warmup, "Warmup time (default 10% of horizon)");
    simulate_cmd->add_option("--trace", sim.trace_path, "Write a line-delimited event trace");

    std::string domestic;
    std::string commercial;
    auto *energy = app.add_subcommand("energy", "Monthly femto energy, savings and tariff cost");
    energy->add_option("--tariff-domestic", domestic, "Domestic tariff slab file");
    energy->add_option("--tariff-commercial", commercial, "Commercial tariff slab file");

    auto *report = app.add_subcommand("report", "Consistency checks against published figures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (calibrate->parsed()) {
            return cmd_calibrate(g, radii);
        }
        if (sweep->parsed()) {
            return cmd_sweep(g, kind, sweep_radius);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(g, sim);
        }
        if (energy->parsed()) {
            return cmd_energy(g, domestic, commercial);
        }
        if (report->parsed()) {
            return cmd_report(g);
        }
    } catch (const ConfigError &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError &e) {
        std::cerr << "numeric failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitNumeric;
    } catch (const std::exception &e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}
