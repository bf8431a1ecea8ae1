#ifndef HETNET_DES_HPP
#define HETNET_DES_HPP

// Event-driven simulation of the same two-tier system the CTMC describes.
// Each call is tracked individually (class, femto flag, departure time), so
// it needs none of the chain's lumping assumptions. It doubles as the
// vehicle for heavy-tailed (Pareto) interarrival times.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "ctmc.hpp"
#include "deployment.hpp"
#include "detail/parallel.hpp"
#include "error.hpp"
#include "policy.hpp"
#include "radio.hpp"

namespace hetnet {

enum class ArrivalKind { Exponential, Pareto };

inline std::string to_string(ArrivalKind k) {
    return k == ArrivalKind::Exponential ? "exponential" : "pareto";
}

inline ArrivalKind parse_arrival_kind(const std::string &text) {
    if (text == "exponential") {
        return ArrivalKind::Exponential;
    }
    if (text == "pareto") {
        return ArrivalKind::Pareto;
    }
    throw ConfigError("unknown arrival kind '" + text + "' (expected exponential|pareto)");
}

/// Pareto durations with shape alpha and the scale chosen so the mean is
/// \p mean: x_m = mean (alpha - 1) / alpha.
class ParetoSampler {
  public:
    ParetoSampler(double shape_alpha, double mean) : m_alpha(shape_alpha) {
        if (!(shape_alpha > 1.0)) {
            throw ConfigError("pareto: shape alpha must be > 1 for a finite mean, got " +
                              std::to_string(shape_alpha));
        }
        if (!(mean > 0.0)) {
            throw ConfigError("pareto: mean must be > 0");
        }
        m_scale = mean * (shape_alpha - 1.0) / shape_alpha;
    }

    double shape() const { return m_alpha; }
    double scale() const { return m_scale; }
    double mean() const { return m_scale * m_alpha / (m_alpha - 1.0); }

    template <typename Rng>
    double operator()(Rng &rng) const {
        // 1 - U lies in (0, 1], so the power is finite.
        const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return m_scale / std::pow(u, 1.0 / m_alpha);
    }

  private:
    double m_alpha;
    double m_scale = 0.0;
};

/// Per-arrival femto assignment from geometry instead of a fixed p_ho: each
/// arrival draws a user position and velocity and is handed off when the
/// RSS trigger and the policy both allow it.
struct GeometricAssignment {
    Deployment deployment;
    RadioParams radio;
    Policy policy;
    VelocityModel velocity;
};

struct SimConfig {
    Capacities capacities{3, 3, 3, 3};
    TrafficModel traffic;
    PolicyKind policy = PolicyKind::Conventional;
    ArrivalKind arrivals = ArrivalKind::Exponential;
    double pareto_alpha = 1.5;
    double horizon = 1e6;
    double warmup = 1e5;
    std::size_t batches = 20;
    std::optional<GeometricAssignment> geometry;
    std::ostream *trace = nullptr; // line-delimited JSON events when set
    bool record_states = false;    // fill SimStats::state_fraction

    void validate() const {
        validate_capacities(capacities);
        traffic.validate(policy);
        if (!(warmup > 0.0) || !(horizon > warmup)) {
            throw ConfigError("simulate: need horizon > warmup > 0");
        }
        if (batches < 20) {
            throw ConfigError("simulate: at least 20 batches are required");
        }
        if (arrivals == ArrivalKind::Pareto) {
            ParetoSampler(pareto_alpha, 1.0);
        }
        if (geometry) {
            geometry->deployment.validate();
            geometry->radio.validate();
            geometry->policy.validate();
            geometry->velocity.validate();
        }
    }
};

/// Batch-means estimate with a 95% confidence half-width.
struct Estimate {
    double mean = 0.0;
    double half_width = 0.0;

    bool overlaps(double other_mean, double other_half_width = 0.0) const {
        return std::abs(mean - other_mean) <= half_width + other_half_width;
    }
};

struct SimStats {
    double horizon = 0.0;
    double warmup = 0.0;
    std::uint64_t events = 0;
    std::array<std::uint64_t, kNumClasses> admitted{};
    std::array<std::uint64_t, kNumClasses> blocked{};
    std::array<std::uint64_t, kNumClasses> handed_off{};
    Estimate mean_n_h;
    Estimate mean_occupancy;
    Estimate macro_load;
    Estimate femto_load;
    Estimate empty_fraction;
    std::array<Estimate, kNumClasses> class_occupancy{};
    /// Admissions per unit time after warmup, per class.
    std::array<double, kNumClasses> admitted_rate{};
    /// Post-warmup time fraction per (n_u, n_r, n_n, n_b, n_h); only with record_states.
    std::map<std::array<int, kNumClasses + 1>, double> state_fraction;
};

namespace detail {

struct Event {
    double time;
    std::uint64_t seq;
    bool arrival;
    std::size_t cls;
    bool femto;
};

struct EventLater {
    bool operator()(const Event &a, const Event &b) const {
        return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
};

enum Metric : std::size_t { kNh, kTotal, kMacro, kFemto, kEmpty, kClass0, kMetricCount = kClass0 + 4 };

inline Estimate batch_estimate(const std::vector<double> &batch_means) {
    const auto b = static_cast<double>(batch_means.size());
    double mean = 0.0;
    for (double x : batch_means) {
        mean += x;
    }
    mean /= b;
    double var = 0.0;
    for (double x : batch_means) {
        var += (x - mean) * (x - mean);
    }
    var /= b - 1.0;
    boost::math::students_t dist(b - 1.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    return {mean, t * std::sqrt(var / b)};
}

} // namespace detail

inline SimStats simulate(const SimConfig &config, std::uint64_t seed) {
    config.validate();
    using detail::Metric;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::array<std::optional<ParetoSampler>, kNumClasses> pareto;
    if (config.arrivals == ArrivalKind::Pareto) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            pareto[c].emplace(config.pareto_alpha, 1.0 / config.traffic.lambda[c]);
        }
    }
    auto next_interarrival = [&](std::size_t c) {
        if (pareto[c]) {
            return (*pareto[c])(rng);
        }
        return std::exponential_distribution<double>(config.traffic.lambda[c])(rng);
    };
    auto assign_to_femto = [&](std::size_t c) {
        if (config.geometry) {
            const GeometricAssignment &g = *config.geometry;
            const double r = g.deployment.macro_radius * std::sqrt(unit(rng));
            const double theta = 2.0 * std::numbers::pi * unit(rng);
            const double v = g.velocity.max_kmh * unit(rng);
            const LinkSample s = evaluate_links(g.deployment, g.radio, detail::polar(r, theta), v);
            return femto_admits(g.radio, g.policy, kAllClasses[c], s);
        }
        return unit(rng) < config.traffic.p_ho[c];
    };

    std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventLater> queue;
    std::uint64_t seq = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        queue.push({next_interarrival(c), seq++, true, c, false});
    }

    SimStats stats;
    stats.horizon = config.horizon;
    stats.warmup = config.warmup;

    const std::size_t nb = config.batches;
    const double window = config.horizon - config.warmup;
    const double batch_len = window / static_cast<double>(nb);
    std::vector<std::array<double, detail::kMetricCount>> integral(nb);

    std::array<int, kNumClasses> n{};
    int n_h = 0;
    double now = 0.0;

    auto accumulate = [&](double from, double to) {
        from = std::max(from, config.warmup);
        if (to <= from) {
            return;
        }
        const int total = n[0] + n[1] + n[2] + n[3];
        std::array<double, detail::kMetricCount> value{};
        value[detail::kNh] = n_h;
        value[detail::kTotal] = total;
        value[detail::kMacro] = total > 0 ? static_cast<double>(total - n_h) / total : 0.0;
        value[detail::kFemto] = total > 0 ? static_cast<double>(n_h) / total : 0.0;
        value[detail::kEmpty] = total == 0 ? 1.0 : 0.0;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            value[detail::kClass0 + c] = n[c];
        }
        if (config.record_states) {
            stats.state_fraction[{n[0], n[1], n[2], n[3], n_h}] += (to - from) / window;
        }
        // Split [from, to) across batch boundaries.
        while (from < to) {
            auto b = static_cast<std::size_t>((from - config.warmup) / batch_len);
            b = std::min(b, nb - 1);
            const double batch_end =
                b + 1 == nb ? config.horizon : config.warmup + static_cast<double>(b + 1) * batch_len;
            const double seg_end = std::min(to, batch_end);
            for (std::size_t m = 0; m < detail::kMetricCount; ++m) {
                integral[b][m] += value[m] * (seg_end - from);
            }
            from = seg_end;
        }
    };

    auto trace = [&](const detail::Event &e, const char *what) {
        if (config.trace == nullptr) {
            return;
        }
        nlohmann::json rec{{"t", e.time},
                           {"event", what},
                           {"class", to_string(kAllClasses[e.cls])},
                           {"femto", e.femto},
                           {"n_h", n_h},
                           {"n", n}};
        *config.trace << rec.dump() << '\n';
    };

    std::array<std::uint64_t, kNumClasses> admitted_after_warmup{};
    while (!queue.empty() && queue.top().time <= config.horizon) {
        detail::Event e = queue.top();
        queue.pop();
        accumulate(now, e.time);
        now = e.time;
        ++stats.events;
        const std::size_t c = e.cls;
        if (e.arrival) {
            queue.push({now + next_interarrival(c), seq++, true, c, false});
            if (n[c] >= config.capacities[c]) {
                ++stats.blocked[c];
                trace(e, "blocked");
                continue;
            }
            e.femto = assign_to_femto(c);
            ++n[c];
            ++stats.admitted[c];
            if (now >= config.warmup) {
                ++admitted_after_warmup[c];
            }
            if (e.femto) {
                ++n_h;
                ++stats.handed_off[c];
            }
            const double hold = std::exponential_distribution<double>(config.traffic.mu[c])(rng);
            queue.push({now + hold, seq++, false, c, e.femto});
            trace(e, "arrival");
        } else {
            --n[c];
            if (e.femto) {
                --n_h;
            }
            trace(e, "departure");
        }
    }
    accumulate(now, config.horizon);

    std::array<std::vector<double>, detail::kMetricCount> batch_means;
    for (std::size_t m = 0; m < detail::kMetricCount; ++m) {
        batch_means[m].resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            batch_means[m][b] = integral[b][m] / batch_len;
        }
    }
    stats.mean_n_h = detail::batch_estimate(batch_means[detail::kNh]);
    stats.mean_occupancy = detail::batch_estimate(batch_means[detail::kTotal]);
    stats.macro_load = detail::batch_estimate(batch_means[detail::kMacro]);
    stats.femto_load = detail::batch_estimate(batch_means[detail::kFemto]);
    stats.empty_fraction = detail::batch_estimate(batch_means[detail::kEmpty]);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        stats.class_occupancy[c] = detail::batch_estimate(batch_means[detail::kClass0 + c]);
        stats.admitted_rate[c] = static_cast<double>(admitted_after_warmup[c]) / window;
    }
    return stats;
}

/// Independent replications with derived seeds, returned in replication order.
inline std::vector<SimStats> simulate_replications(const SimConfig &config, std::uint64_t seed,
                                                   std::size_t replications) {
    if (config.trace != nullptr && replications > 1) {
        throw ConfigError("simulate: event tracing supports a single replication only");
    }
    std::vector<SimStats> out(replications);
    detail::parallel_for(replications, [&](std::size_t r) {
        out[r] = simulate(config, detail::mix_seed(seed, r));
    });
    return out;
}

inline void to_json(nlohmann::json &j, const Estimate &e) {
    j = nlohmann::json{{"mean", e.mean}, {"half_width_95", e.half_width}};
}

inline void to_json(nlohmann::json &j, const SimStats &s) {
    nlohmann::json classes = nlohmann::json::object();
    for (ServiceClass cls : kAllClasses) {
        const std::size_t c = index_of(cls);
        classes[std::string(to_string(cls))] = {{"admitted", s.admitted[c]},
                                                {"blocked", s.blocked[c]},
                                                {"handed_off", s.handed_off[c]},
                                                {"admitted_rate", s.admitted_rate[c]},
                                                {"occupancy", s.class_occupancy[c]}};
    }
    j = nlohmann::json{{"horizon", s.horizon},
                       {"warmup", s.warmup},
                       {"events", s.events},
                       {"expected_femto_resident_count", s.mean_n_h},
                       {"mean_occupancy", s.mean_occupancy},
                       {"macro_load", s.macro_load},
                       {"femto_load", s.femto_load},
                       {"empty_fraction", s.empty_fraction},
                       {"classes", classes}};
}

} // namespace hetnet

#endif
