#ifndef HETNET_IO_HPP
#define HETNET_IO_HPP

// CSV / JSON emission for sweeps, calibration and energy tables, plus the
// experiment manifest. Output contains no timestamps or host data, so a
// rerun from the same manifest is byte-identical.

#include <array>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "calibration.hpp"
#include "config.hpp"
#include "ctmc.hpp"
#include "policy.hpp"

namespace hetnet {

inline constexpr int kCsvSchemaVersion = 1;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
inline std::string git_blob_sha1(const std::string &content) {
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), digest.data(), &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("sha1 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

inline std::string canonical_config(const ExperimentConfig &config) {
    return config_to_json(config).dump();
}

inline std::string config_hash(const ExperimentConfig &config) {
    return git_blob_sha1(canonical_config(config));
}

/// Comment header carried by every CSV: schema tag, seed and resolved config.
inline void write_csv_preamble(std::ostream &os, const std::string &schema,
                               const ExperimentConfig &config) {
    os << "# schema: " << schema << '/' << kCsvSchemaVersion << '\n';
    os << "# seed: " << config.seed << '\n';
    os << "# config_hash: " << config_hash(config) << '\n';
    os << "# config: " << canonical_config(config) << '\n';
}

inline nlohmann::json manifest_json(const std::string &command, const ExperimentConfig &config,
                                    const std::vector<std::string> &outputs,
                                    nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json j{{"schema", "hetnet.manifest/" + std::to_string(kCsvSchemaVersion)},
                     {"command", command},
                     {"seed", config.seed},
                     {"config_hash", config_hash(config)},
                     {"config", config_to_json(config)},
                     {"outputs", outputs}};
    for (auto &[k, v] : extra.items()) {
        j[k] = v;
    }
    return j;
}

inline void write_sweep_csv(std::ostream &os, const SweepResult &sweep,
                            const ExperimentConfig &config) {
    write_csv_preamble(os, "hetnet.sweep." + sweep.kind, config);
    os << sweep.variable
       << ",exclusion_radius_m,threshold_dbm,policy,p_ho_ugs,p_ho_rtps,p_ho_nrtps,p_ho_be,"
          "macro_load,femto_load,handoff_probability,empty_probability,mean_occupancy,"
          "blocking_ugs,blocking_rtps,blocking_nrtps,blocking_be,status\n";
    for (const SweepPoint &p : sweep.points) {
        os << format_double(p.x) << ',' << format_double(p.exclusion_radius) << ','
           << format_double(p.threshold) << ',' << to_string(p.policy);
        for (double v : p.p_ho.probability) {
            os << ',' << format_double(v);
        }
        const ChainMetrics &m = p.metrics;
        os << ',' << format_double(m.macro_load) << ',' << format_double(m.femto_load) << ','
           << format_double(m.handoff_probability) << ',' << format_double(m.empty_probability)
           << ',' << format_double(m.mean_occupancy);
        for (double b : m.blocking) {
            os << ',' << format_double(b);
        }
        os << ',' << (p.failed ? "failed" : "ok") << '\n';
    }
}

inline nlohmann::json sweep_json(const SweepResult &sweep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepPoint &p : sweep.points) {
        rows.push_back({{sweep.variable, p.x},
                        {"exclusion_radius_m", p.exclusion_radius},
                        {"threshold_dbm", p.threshold},
                        {"policy", std::string(to_string(p.policy))},
                        {"p_ho", p.p_ho.probability},
                        {"p_ho_std_error", p.p_ho.std_error},
                        {"macro_load", p.metrics.macro_load},
                        {"femto_load", p.metrics.femto_load},
                        {"handoff_probability", p.metrics.handoff_probability},
                        {"empty_probability", p.metrics.empty_probability},
                        {"mean_occupancy", p.metrics.mean_occupancy},
                        {"blocking", p.metrics.blocking},
                        {"status", p.failed ? "failed" : "ok"},
                        {"error", p.error}});
    }
    return {{"kind", sweep.kind}, {"metadata", sweep.metadata}, {"rows", rows}};
}

inline void write_calibration_csv(std::ostream &os, const std::vector<BalancedThreshold> &rows,
                                  const ExperimentConfig &config) {
    write_csv_preamble(os, "hetnet.calibrate", config);
    os << "exclusion_radius_m,balanced_threshold_dbm,clamped,macro_load,femto_load,"
          "femto_count,lower_bound_dbm,upper_bound_dbm\n";
    for (const BalancedThreshold &b : rows) {
        os << format_double(b.exclusion_radius) << ',' << format_double(b.threshold) << ','
           << (b.clamped ? 1 : 0) << ',' << format_double(b.macro_load) << ','
           << format_double(b.femto_load) << ',' << b.femto_count << ','
           << format_double(b.lower_bound) << ',' << format_double(b.upper_bound) << '\n';
    }
}

inline nlohmann::json calibration_json(const std::vector<BalancedThreshold> &rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const BalancedThreshold &b : rows) {
        out.push_back({{"exclusion_radius_m", b.exclusion_radius},
                       {"balanced_threshold_dbm", b.threshold},
                       {"clamped", b.clamped},
                       {"macro_load", b.macro_load},
                       {"femto_load", b.femto_load},
                       {"femto_count", b.femto_count},
                       {"lower_bound_dbm", b.lower_bound},
                       {"upper_bound_dbm", b.upper_bound},
                       {"warnings", b.warnings}});
    }
    return out;
}

inline void write_energy_csv(std::ostream &os, const EnergySweep &sweep,
                             const ExperimentConfig &config) {
    write_csv_preamble(os, "hetnet.energy", config);
    os << "rho,policy,handoff_probability,prob_active,prob_active_clamped,"
          "energy_active_idle_kwh,energy_conventional_kwh,energy_active_idle_mws,"
          "energy_conventional_mws,savings_percent,domestic_cost_active_idle,"
          "domestic_cost_conventional,domestic_profit_percent,commercial_cost_active_idle,"
          "commercial_cost_conventional,commercial_profit_percent,status\n";
    for (const EnergyRow &r : sweep.rows) {
        os << format_double(r.rho) << ',' << to_string(r.policy) << ','
           << format_double(r.handoff_probability) << ',' << format_double(r.prob_active.value)
           << ',' << (r.prob_active.clamped ? 1 : 0) << ','
           << format_double(r.energy_active_idle_kwh) << ','
           << format_double(r.energy_conventional_kwh) << ','
           << format_double(r.energy_active_idle_mws) << ','
           << format_double(r.energy_conventional_mws) << ','
           << format_double(r.savings_percent) << ','
           << format_double(r.domestic_cost_active_idle) << ','
           << format_double(r.domestic_cost_conventional) << ','
           << format_double(r.domestic_profit_percent) << ','
           << format_double(r.commercial_cost_active_idle) << ','
           << format_double(r.commercial_cost_conventional) << ','
           << format_double(r.commercial_profit_percent) << ',' << (r.failed ? "failed" : "ok")
           << '\n';
    }
}

inline nlohmann::json energy_json(const EnergySweep &sweep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const EnergyRow &r : sweep.rows) {
        rows.push_back({{"rho", r.rho},
                        {"policy", std::string(to_string(r.policy))},
                        {"handoff_probability", r.handoff_probability},
                        {"prob_active", r.prob_active.value},
                        {"prob_active_raw", r.prob_active.raw},
                        {"prob_active_clamped", r.prob_active.clamped},
                        {"energy_active_idle_kwh", r.energy_active_idle_kwh},
                        {"energy_conventional_kwh", r.energy_conventional_kwh},
                        {"energy_active_idle_mws", r.energy_active_idle_mws},
                        {"energy_conventional_mws", r.energy_conventional_mws},
                        {"savings_percent", r.savings_percent},
                        {"domestic_profit_percent", r.domestic_profit_percent},
                        {"commercial_profit_percent", r.commercial_profit_percent},
                        {"status", r.failed ? "failed" : "ok"}});
    }
    return {{"metadata", sweep.metadata}, {"rows", rows}};
}

} // namespace hetnet

#endif
