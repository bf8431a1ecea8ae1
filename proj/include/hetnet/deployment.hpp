#ifndef HETNET_DEPLOYMENT_HPP
#define HETNET_DEPLOYMENT_HPP

// Macro disk with femtocells scattered outside an exclusion radius, and the
// Monte Carlo estimate of the per-class probability that a new call is
// served by a femto BS.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <json.hpp>

#include "detail/parallel.hpp"
#include "error.hpp"
#include "policy.hpp"
#include "radio.hpp"

namespace hetnet {

struct Point {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }

    friend bool operator==(const Point &, const Point &) = default;
};

inline double distance(const Point &a, const Point &b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Deployment {
    double macro_radius = 1200.0;
    double exclusion_radius = 100.0;
    double femto_radius = 30.0;
    std::vector<Point> femto_positions;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(macro_radius > 0.0)) {
            throw ConfigError("deployment: macro_radius must be > 0");
        }
        if (!(exclusion_radius >= 0.0) || !(exclusion_radius < macro_radius)) {
            throw ConfigError("deployment: exclusion radius R must satisfy 0 <= R < macro_radius");
        }
        if (!(femto_radius > 0.0)) {
            throw ConfigError("deployment: femto_radius must be > 0");
        }
        // Allow for rounding in the polar -> cartesian conversion.
        const double slack = 1e-9 * macro_radius;
        for (const auto &p : femto_positions) {
            const double r = p.norm();
            if (r < exclusion_radius - slack || r > macro_radius + slack) {
                throw ConfigError("deployment: femto at distance " + std::to_string(r) +
                                  " lies outside the annulus [R, macro_radius]");
            }
        }
    }

    friend bool operator==(const Deployment &, const Deployment &) = default;
};

namespace detail {
// Uniform-by-area radius on the annulus [inner, outer].
inline double annulus_radius(double inner, double outer, double u) {
    return std::sqrt(inner * inner + u * (outer * outer - inner * inner));
}

inline Point polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }
} // namespace detail

/// \p femto_count femtos uniform by area over the annulus [R, macro_radius].
inline Deployment deploy_femtos(std::uint64_t seed, double macro_radius, double exclusion_radius,
                                std::size_t femto_count, double femto_radius = 30.0) {
    Deployment d;
    d.macro_radius = macro_radius;
    d.exclusion_radius = exclusion_radius;
    d.femto_radius = femto_radius;
    d.seed = seed;
    if (!(exclusion_radius < macro_radius)) {
        throw ConfigError("deploy_femtos: exclusion radius R must be smaller than macro radius");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    d.femto_positions.reserve(femto_count);
    for (std::size_t i = 0; i < femto_count; ++i) {
        const double r = detail::annulus_radius(exclusion_radius, macro_radius, unit(rng));
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        d.femto_positions.push_back(detail::polar(r, theta));
    }
    d.validate();
    return d;
}

inline double annulus_area_km2(double inner_m, double outer_m) {
    return std::numbers::pi * (outer_m * outer_m - inner_m * inner_m) * 1e-6;
}

/// Density-driven deployment. One uniform draw over the whole macro disk
/// (count = density x disk area) is thinned to the annulus [R, macro_radius],
/// so the expected count is density x annulus area and deployments for a
/// larger R are subsets of those for a smaller R under the same seed.
inline Deployment deploy_femtos_by_density(std::uint64_t seed, double macro_radius,
                                           double exclusion_radius, double density_per_km2,
                                           double femto_radius = 30.0) {
    if (!(density_per_km2 >= 0.0)) {
        throw ConfigError("deployment: femto density must be >= 0");
    }
    if (!(exclusion_radius < macro_radius)) {
        throw ConfigError("deploy_femtos: exclusion radius R must be smaller than macro radius");
    }
    const auto full = static_cast<std::size_t>(
        std::llround(density_per_km2 * annulus_area_km2(0.0, macro_radius)));
    Deployment d = deploy_femtos(seed, macro_radius, 0.0, full, femto_radius);
    d.exclusion_radius = exclusion_radius;
    std::erase_if(d.femto_positions,
                  [&](const Point &p) { return p.norm() < exclusion_radius; });
    d.validate();
    return d;
}

struct NearestFemto {
    std::size_t index;
    double distance;
};

inline std::optional<NearestFemto> nearest_femto(const Deployment &deployment,
                                                 const Point &position) {
    std::optional<NearestFemto> best;
    for (std::size_t i = 0; i < deployment.femto_positions.size(); ++i) {
        const double dist = distance(deployment.femto_positions[i], position);
        if (!best || dist < best->distance) {
            best = NearestFemto{i, dist};
        }
    }
    return best;
}

struct VelocityModel {
    double max_kmh = 60.0; // velocities are uniform on [0, max_kmh]

    void validate() const {
        if (!(max_kmh >= 0.0)) {
            throw ConfigError("velocity: max_kmh must be >= 0");
        }
    }
};

struct UserSample {
    Point position;
    double velocity = 0.0;
    ServiceClass service_class = ServiceClass::UGS;
};

/// Draws a user uniformly by area over the macro disk with a uniform
/// velocity and a class drawn from the 1:1:1:1 mix.
template <typename Rng>
UserSample sample_user(Rng &rng, double macro_radius, const VelocityModel &velocity) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    UserSample u;
    const double r = macro_radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    u.position = detail::polar(r, theta);
    u.velocity = velocity.max_kmh * unit(rng);
    u.service_class = kAllClasses[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];
    return u;
}

// Distances below this are treated as co-located with the transmitter; the
// log terms would otherwise diverge.
inline constexpr double kMinLinkDistance = 1e-3;

/// Radio geometry of one sampled user: RSS from the macro BS and from the
/// nearest femto (-inf when the deployment is empty).
struct LinkSample {
    double rss_m;
    double rss_f;
    double velocity;
};

inline LinkSample evaluate_links(const Deployment &deployment, const RadioParams &radio,
                                 const Point &position, double velocity) {
    LinkSample s;
    s.rss_m = rss_macro(radio, std::max(position.norm(), kMinLinkDistance));
    const auto nearest = nearest_femto(deployment, position);
    s.rss_f = nearest ? rss_femto(radio, std::max(nearest->distance, kMinLinkDistance))
                      : -std::numeric_limits<double>::infinity();
    s.velocity = velocity;
    return s;
}

inline bool femto_admits(const RadioParams &radio, const Policy &policy, ServiceClass c,
                         const LinkSample &s) {
    return handoff_trigger(radio, s.rss_m, s.rss_f) && permits_handoff(policy, c, s.velocity);
}

struct HandoffFraction {
    std::array<double, kNumClasses> probability{};
    std::array<double, kNumClasses> std_error{};

    double operator[](ServiceClass c) const { return probability[index_of(c)]; }
};

/// Common-random-numbers sample of user geometry for one deployment. The
/// expensive part (nearest-femto search) runs once; the handoff fraction
/// for any threshold / hysteresis / policy is then a linear scan, and it is
/// monotone in the threshold because the samples never change.
///
/// Samples are generated in fixed-size chunks with per-chunk derived seeds,
/// so the result is identical for any number of worker threads.
class HandoffSampleSet {
  public:
    static constexpr std::size_t kChunk = 4096;

    HandoffSampleSet(const Deployment &deployment, const RadioParams &radio,
                     const VelocityModel &velocity, std::size_t n_samples, std::uint64_t seed)
        : m_samples(n_samples) {
        if (n_samples == 0) {
            throw ConfigError("handoff estimate: n_samples must be >= 1");
        }
        deployment.validate();
        velocity.validate();
        const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
        detail::parallel_for(chunks, [&](std::size_t k) {
            std::mt19937_64 rng(detail::mix_seed(seed, k));
            const std::size_t end = std::min(n_samples, (k + 1) * kChunk);
            for (std::size_t i = k * kChunk; i < end; ++i) {
                const UserSample u = sample_user(rng, deployment.macro_radius, velocity);
                m_samples[i] = evaluate_links(deployment, radio, u.position, u.velocity);
            }
        });
    }

    std::size_t size() const { return m_samples.size(); }

    const std::vector<LinkSample> &samples() const { return m_samples; }

    /// Only the threshold and hysteresis of \p radio are consulted here; the
    /// transmit powers were fixed at construction.
    HandoffFraction fraction(const RadioParams &radio, const Policy &policy) const {
        std::array<std::size_t, kNumClasses> hits{};
        for (const auto &s : m_samples) {
            if (!handoff_trigger(radio, s.rss_m, s.rss_f)) {
                continue;
            }
            for (ServiceClass c : kAllClasses) {
                if (permits_handoff(policy, c, s.velocity)) {
                    ++hits[index_of(c)];
                }
            }
        }
        HandoffFraction out;
        const double n = static_cast<double>(m_samples.size());
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const double p = static_cast<double>(hits[c]) / n;
            out.probability[c] = p;
            out.std_error[c] = std::sqrt(p * (1.0 - p) / n);
        }
        return out;
    }

  private:
    std::vector<LinkSample> m_samples;
};

/// P[a new call of each class is served by a femto]: the RSS trigger holds
/// at the nearest femto and the policy lets the call hand off.
inline HandoffFraction estimate_handoff_fraction(const Deployment &deployment,
                                                 const RadioParams &radio, const Policy &policy,
                                                 const VelocityModel &velocity,
                                                 std::size_t n_samples, std::uint64_t seed) {
    return HandoffSampleSet(deployment, radio, velocity, n_samples, seed).fraction(radio, policy);
}

inline void to_json(nlohmann::json &j, const Point &p) { j = nlohmann::json::array({p.x, p.y}); }

inline void from_json(const nlohmann::json &j, Point &p) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("deployment: each position must be a [x, y] pair");
    }
    p.x = j.at(0).get<double>();
    p.y = j.at(1).get<double>();
}

inline void to_json(nlohmann::json &j, const Deployment &d) {
    j = nlohmann::json{{"macro_radius", d.macro_radius},
                       {"exclusion_radius", d.exclusion_radius},
                       {"femto_radius", d.femto_radius},
                       {"seed", d.seed},
                       {"femto_positions", d.femto_positions}};
}

inline void from_json(const nlohmann::json &j, Deployment &d) {
    try {
        d.macro_radius = j.at("macro_radius").get<double>();
        d.exclusion_radius = j.at("exclusion_radius").get<double>();
        d.femto_radius = j.at("femto_radius").get<double>();
        d.seed = j.at("seed").get<std::uint64_t>();
        d.femto_positions = j.at("femto_positions").get<std::vector<Point>>();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("deployment JSON: ") + e.what());
    }
    d.validate();
}

} // namespace hetnet

#endif
