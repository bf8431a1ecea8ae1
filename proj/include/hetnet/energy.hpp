#ifndef HETNET_ENERGY_HPP
#define HETNET_ENERGY_HPP

// Femto BS energy with and without the active/idle (sniffer) mode, the
// resulting savings, and slab-progressive billing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace hetnet {

inline constexpr double kHoursPerMonth = 24.0 * 30.0;
inline constexpr double kSecondsPerMonth = 3600.0 * kHoursPerMonth;

struct EnergyParams {
    double p_active = 100.0; // mW
    double p_idle = 60.0;    // mW
    double p_sniff = 3.0;    // mW

    void validate() const {
        if (!(p_idle + p_sniff > 0.0) || !(p_active > p_idle + p_sniff)) {
            throw ConfigError("energy: need p_active > p_idle + p_sniff > 0");
        }
    }
};

struct ActiveProbability {
    double value = 0.0; // clamped to [0, 1]
    double raw = 0.0;
    bool clamped = false;
};

/// (1 - e^-rho) * ho_prob. ho_prob is an expected count and can push the
/// product past 1, hence the clamp flag.
inline ActiveProbability prob_active(double rho, double ho_prob) {
    if (!(rho >= 0.0) || !(ho_prob >= 0.0)) {
        throw std::domain_error("prob_active: rho and ho_prob must be >= 0");
    }
    ActiveProbability p;
    p.raw = -std::expm1(-rho) * ho_prob;
    p.value = std::clamp(p.raw, 0.0, 1.0);
    p.clamped = p.value != p.raw;
    return p;
}

/// Mean power (mW) of a femto that is active with probability \p pa.
inline double mean_power_active_idle(const EnergyParams &params, double pa) {
    if (!(pa >= 0.0 && pa <= 1.0)) {
        throw std::domain_error("energy: prob_active must lie in [0, 1]");
    }
    return params.p_active * pa + (params.p_idle + params.p_sniff) * (1.0 - pa);
}

inline double mw_to_kwh_per_month(double milliwatts) { return milliwatts * 1e-6 * kHoursPerMonth; }

/// kWh per 30-day month with active/idle switching.
inline double monthly_energy_active_idle(const EnergyParams &params, double pa) {
    return mw_to_kwh_per_month(mean_power_active_idle(params, pa));
}

/// kWh per 30-day month for an always-on femto.
inline double monthly_energy_conventional(const EnergyParams &params) {
    return mw_to_kwh_per_month(params.p_active);
}

// Power times seconds per month, left in mW*s. Kept only so reports can show
// the unnormalized figure next to the kWh value.
inline double monthly_energy_active_idle_mws(const EnergyParams &params, double pa) {
    return mean_power_active_idle(params, pa) * kSecondsPerMonth;
}

inline double monthly_energy_conventional_mws(const EnergyParams &params) {
    return params.p_active * kSecondsPerMonth;
}

inline double savings_percent(double e_active_idle, double e_conventional) {
    if (!(e_conventional > 0.0)) {
        throw std::domain_error("savings_percent: conventional energy must be > 0");
    }
    return 100.0 * (1.0 - e_active_idle / e_conventional);
}

/// Largest possible saving (prob_active = 0).
inline double max_savings_percent(const EnergyParams &params) {
    return 100.0 * (1.0 - (params.p_idle + params.p_sniff) / params.p_active);
}

enum class TariffCategory { Domestic, Commercial };

struct TariffSlab {
    std::optional<double> upto_kwh; // nullopt: unbounded, must be last
    double price_per_kwh = 0.0;
};

struct TariffSchedule {
    TariffCategory category = TariffCategory::Domestic;
    std::vector<TariffSlab> slabs;

    static TariffSchedule flat(TariffCategory category, double price) {
        return TariffSchedule{category, {TariffSlab{std::nullopt, price}}};
    }

    void validate() const {
        if (slabs.empty()) {
            throw ConfigError("tariff: schedule has no slabs");
        }
        double previous = 0.0;
        for (std::size_t i = 0; i < slabs.size(); ++i) {
            const TariffSlab &slab = slabs[i];
            if (!(slab.price_per_kwh >= 0.0) || !std::isfinite(slab.price_per_kwh)) {
                throw ConfigError("tariff: slab " + std::to_string(i) + " has a negative price");
            }
            const bool last = i + 1 == slabs.size();
            if (!slab.upto_kwh) {
                if (!last) {
                    throw ConfigError("tariff: only the last slab may have a null upper bound");
                }
                continue;
            }
            if (last) {
                throw ConfigError("tariff: the last slab must have a null upper bound");
            }
            if (!(*slab.upto_kwh > previous)) {
                throw ConfigError("tariff: slab bounds must be strictly increasing and positive");
            }
            previous = *slab.upto_kwh;
        }
    }
};

inline std::string to_string(TariffCategory c) {
    return c == TariffCategory::Domestic ? "domestic" : "commercial";
}

/// Progressive billing: each slab's span is charged at its own price.
inline double monthly_cost(double energy_kwh, const TariffSchedule &tariff) {
    if (!(energy_kwh >= 0.0)) {
        throw std::domain_error("monthly_cost: energy must be >= 0");
    }
    tariff.validate();
    double cost = 0.0;
    double lower = 0.0;
    for (const TariffSlab &slab : tariff.slabs) {
        const double upper = slab.upto_kwh.value_or(std::numeric_limits<double>::infinity());
        if (energy_kwh <= lower) {
            break;
        }
        cost += (std::min(energy_kwh, upper) - lower) * slab.price_per_kwh;
        lower = upper;
    }
    return cost;
}

inline void to_json(nlohmann::json &j, const TariffSchedule &t) {
    j = nlohmann::json::array();
    for (const TariffSlab &s : t.slabs) {
        nlohmann::json row;
        row["upto_kwh"] = s.upto_kwh ? nlohmann::json(*s.upto_kwh) : nlohmann::json(nullptr);
        row["price_per_kwh"] = s.price_per_kwh;
        j.push_back(std::move(row));
    }
}

/// Parses the slab list [{"upto_kwh": number|null, "price_per_kwh": number}, ...].
inline TariffSchedule tariff_from_json(const nlohmann::json &j, TariffCategory category) {
    if (!j.is_array()) {
        throw ConfigError("tariff: expected a JSON list of slabs");
    }
    TariffSchedule t;
    t.category = category;
    for (const auto &row : j) {
        if (!row.is_object()) {
            throw ConfigError("tariff: each slab must be an object");
        }
        for (const auto &[key, value] : row.items()) {
            if (key != "upto_kwh" && key != "price_per_kwh") {
                throw ConfigError("tariff: unknown key '" + key + "'");
            }
        }
        if (!row.contains("upto_kwh") || !row.contains("price_per_kwh")) {
            throw ConfigError("tariff: each slab needs upto_kwh and price_per_kwh");
        }
        TariffSlab slab;
        const auto &upto = row.at("upto_kwh");
        if (!upto.is_null()) {
            if (!upto.is_number()) {
                throw ConfigError("tariff: upto_kwh must be a number or null");
            }
            slab.upto_kwh = upto.get<double>();
        }
        if (!row.at("price_per_kwh").is_number()) {
            throw ConfigError("tariff: price_per_kwh must be a number");
        }
        slab.price_per_kwh = row.at("price_per_kwh").get<double>();
        t.slabs.push_back(slab);
    }
    t.validate();
    return t;
}

} // namespace hetnet

#endif
