#ifndef HETNET_POLICY_HPP
#define HETNET_POLICY_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "error.hpp"

namespace hetnet {

enum class ServiceClass { UGS = 0, rtPS = 1, nrtPS = 2, BE = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<ServiceClass, kNumClasses> kAllClasses = {
    ServiceClass::UGS, ServiceClass::rtPS, ServiceClass::nrtPS, ServiceClass::BE};

constexpr bool is_realtime(ServiceClass c) {
    return c == ServiceClass::UGS || c == ServiceClass::rtPS;
}

constexpr std::size_t index_of(ServiceClass c) { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(ServiceClass c) {
    switch (c) {
    case ServiceClass::UGS:
        return "UGS";
    case ServiceClass::rtPS:
        return "rtPS";
    case ServiceClass::nrtPS:
        return "nrtPS";
    case ServiceClass::BE:
        return "BE";
    }
    return "?";
}

enum class PolicyKind { Conventional, SoftQoS, HardQoS };

constexpr std::string_view to_string(PolicyKind k) {
    switch (k) {
    case PolicyKind::Conventional:
        return "conventional";
    case PolicyKind::SoftQoS:
        return "soft";
    case PolicyKind::HardQoS:
        return "hard";
    }
    return "?";
}

inline PolicyKind parse_policy_kind(std::string_view text) {
    if (text == "conventional") {
        return PolicyKind::Conventional;
    }
    if (text == "soft") {
        return PolicyKind::SoftQoS;
    }
    if (text == "hard") {
        return PolicyKind::HardQoS;
    }
    throw ConfigError("unknown policy '" + std::string(text) +
                      "' (expected conventional|soft|hard)");
}

struct Policy {
    PolicyKind kind = PolicyKind::Conventional;
    double velocity_threshold = 10.0; // km/h

    void validate() const {
        if (!(velocity_threshold > 0.0)) {
            throw ConfigError("policy: velocity_threshold must be > 0");
        }
    }
};

/// Whether a call of class \p c may ever be served by a femto BS under \p kind.
constexpr bool femto_eligible(PolicyKind kind, ServiceClass c) {
    return kind != PolicyKind::HardQoS || !is_realtime(c);
}

/// Handoff filter applied at admission. A user exactly at the velocity
/// threshold is still allowed to hand off.
inline bool permits_handoff(const Policy &policy, ServiceClass c, double velocity_kmh) {
    if (!(velocity_kmh >= 0.0)) {
        throw std::domain_error("permits_handoff: velocity must be >= 0");
    }
    switch (policy.kind) {
    case PolicyKind::Conventional:
        return true;
    case PolicyKind::SoftQoS:
        return velocity_kmh <= policy.velocity_threshold;
    case PolicyKind::HardQoS:
        return velocity_kmh <= policy.velocity_threshold && !is_realtime(c);
    }
    return false;
}

} // namespace hetnet

#endif
