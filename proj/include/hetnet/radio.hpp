#ifndef HETNET_RADIO_HPP
#define HETNET_RADIO_HPP

// Deterministic slow-fading pathloss for the two tiers and the RSS
// comparison that arms a macro -> femto handoff. All quantities stay in the
// logarithmic domain (dB / dBm); distances are meters.

#include <cmath>
#include <stdexcept>
#include <string>

#include "error.hpp"

namespace hetnet {

struct RadioParams {
    double macro_tx_power = 46.0;       // dBm
    double femto_tx_power = 20.0;       // dBm
    double wall_loss = 10.0;            // dB, indoor penetration term of the macro model
    double hysteresis = 0.0;            // dB
    double macro_rss_threshold = -70.0; // dBm

    void validate() const {
        if (!(macro_tx_power > femto_tx_power)) {
            throw ConfigError("radio: macro_tx_power must exceed femto_tx_power");
        }
        if (!(wall_loss >= 0.0)) {
            throw ConfigError("radio: wall_loss must be >= 0");
        }
        if (!(hysteresis >= 0.0)) {
            throw ConfigError("radio: hysteresis must be >= 0");
        }
        if (!std::isfinite(macro_rss_threshold)) {
            throw ConfigError("radio: macro_rss_threshold must be finite");
        }
    }
};

namespace detail {
inline void require_positive_distance(double distance_m, const char *who) {
    if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
        throw std::domain_error(std::string(who) + ": distance must be positive, got " +
                                std::to_string(distance_m));
    }
}
} // namespace detail

/// Macro-tier pathloss in dB at \p distance_m meters.
inline double macro_pathloss(double distance_m, double wall_loss = 10.0) {
    detail::require_positive_distance(distance_m, "macro_pathloss");
    return 15.3 + 37.6 * std::log10(distance_m) + wall_loss;
}

/// Femto-tier pathloss in dB at \p distance_m meters.
inline double femto_pathloss(double distance_m) {
    detail::require_positive_distance(distance_m, "femto_pathloss");
    return 38.46 + 20.0 * std::log10(distance_m) + 0.7 * distance_m;
}

inline double rss_macro(const RadioParams &params, double distance_m) {
    return params.macro_tx_power - macro_pathloss(distance_m, params.wall_loss);
}

inline double rss_femto(const RadioParams &params, double distance_m) {
    return params.femto_tx_power - femto_pathloss(distance_m);
}

/// True when the macro signal is below threshold and the femto signal beats
/// it by more than the hysteresis margin.
inline bool handoff_trigger(const RadioParams &params, double rss_m, double rss_f) {
    return rss_m < params.macro_rss_threshold && rss_f > rss_m + params.hysteresis;
}

} // namespace hetnet

#endif
