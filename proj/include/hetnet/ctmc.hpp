#ifndef HETNET_CTMC_HPP
#define HETNET_CTMC_HPP

// Five-dimensional CTMC (n_u, n_r, n_n, n_b, n_h) of the two-tier network:
// per-class call counts plus the number of calls currently served by femto
// BSs. Per-class capacities make the chain finite; arrivals that find their
// class full are lost.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "error.hpp"
#include "policy.hpp"

namespace hetnet {

using Capacities = std::array<int, kNumClasses>;

struct CtmcState {
    std::array<int, kNumClasses> n{};
    int n_h = 0;

    int total() const { return n[0] + n[1] + n[2] + n[3]; }

    friend bool operator==(const CtmcState &, const CtmcState &) = default;
};

struct TrafficModel {
    std::array<double, kNumClasses> lambda{0.2, 0.2, 0.2, 0.2};
    std::array<double, kNumClasses> mu{0.2, 0.2, 0.2, 0.2};
    std::array<double, kNumClasses> p_ho{};

    static TrafficModel symmetric(double lambda, double mu, double p_ho) {
        TrafficModel t;
        t.lambda.fill(lambda);
        t.mu.fill(mu);
        t.p_ho.fill(p_ho);
        return t;
    }

    /// Aggregate offered load sum(lambda) / sum(mu).
    double rho() const {
        double l = 0.0;
        double m = 0.0;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            l += lambda[c];
            m += mu[c];
        }
        return l / m;
    }

    void validate(PolicyKind policy) const {
        for (ServiceClass c : kAllClasses) {
            const std::size_t i = index_of(c);
            const std::string name(to_string(c));
            if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
                throw ConfigError("traffic: lambda[" + name + "] must be > 0");
            }
            if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
                throw ConfigError("traffic: mu[" + name + "] must be > 0");
            }
            if (!(p_ho[i] >= 0.0 && p_ho[i] <= 1.0)) {
                throw ConfigError("traffic: p_ho[" + name + "] must lie in [0, 1]");
            }
            if (p_ho[i] > 0.0 && !femto_eligible(policy, c)) {
                throw ConfigError("traffic: p_ho[" + name + "] must be 0 under hard QoS");
            }
        }
    }
};

inline void validate_capacities(const Capacities &caps) {
    for (ServiceClass c : kAllClasses) {
        if (caps[index_of(c)] < 1) {
            throw ConfigError("capacity for " + std::string(to_string(c)) + " must be >= 1");
        }
    }
}

/// Closed-form size of the state space: every count tuple contributes one
/// state per admissible n_h in [0, E], E = number of femto-eligible calls.
/// Summing (1 + E) over the product grid gives N * (1 + sum_elig C / 2).
inline std::uint64_t count_states(const Capacities &caps, PolicyKind policy) {
    validate_capacities(caps);
    std::uint64_t grid = 1;
    std::uint64_t eligible_caps = 0;
    for (ServiceClass c : kAllClasses) {
        grid *= static_cast<std::uint64_t>(caps[index_of(c)] + 1);
        if (femto_eligible(policy, c)) {
            eligible_caps += static_cast<std::uint64_t>(caps[index_of(c)]);
        }
    }
    return grid * (2 + eligible_caps) / 2;
}

class StateSpace {
  public:
    StateSpace(const Capacities &caps, PolicyKind policy) : m_caps(caps), m_policy(policy) {
        std::size_t grid = 1;
        for (int cap : caps) {
            grid *= static_cast<std::size_t>(cap + 1);
        }
        m_offset.resize(grid + 1);
        m_states.reserve(count_states(caps, policy));
        for (std::size_t code = 0; code < grid; ++code) {
            m_offset[code] = m_states.size();
            CtmcState s;
            std::size_t rest = code;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                s.n[c] = static_cast<int>(rest % static_cast<std::size_t>(caps[c] + 1));
                rest /= static_cast<std::size_t>(caps[c] + 1);
            }
            const int e = eligible_count(s);
            for (int h = 0; h <= e; ++h) {
                s.n_h = h;
                m_states.push_back(s);
            }
        }
        m_offset[grid] = m_states.size();
    }

    const Capacities &capacities() const { return m_caps; }
    PolicyKind policy() const { return m_policy; }
    std::size_t size() const { return m_states.size(); }
    const CtmcState &operator[](std::size_t i) const { return m_states[i]; }
    const std::vector<CtmcState> &states() const { return m_states; }

    /// Calls that may currently be femto-resident under the chain's policy.
    int eligible_count(const CtmcState &s) const {
        int e = 0;
        for (ServiceClass c : kAllClasses) {
            if (femto_eligible(m_policy, c)) {
                e += s.n[hetnet::index_of(c)];
            }
        }
        return e;
    }

    bool contains(const CtmcState &s) const {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (s.n[c] < 0 || s.n[c] > m_caps[c]) {
                return false;
            }
        }
        return s.n_h >= 0 && s.n_h <= eligible_count(s);
    }

    std::optional<std::size_t> index_of(const CtmcState &s) const {
        if (!contains(s)) {
            return std::nullopt;
        }
        return m_offset[tuple_code(s)] + static_cast<std::size_t>(s.n_h);
    }

    /// Index of (0,0,0,0,0); always the first enumerated state.
    std::size_t empty_index() const { return 0; }

  private:
    std::size_t tuple_code(const CtmcState &s) const {
        std::size_t code = 0;
        for (std::size_t c = kNumClasses; c-- > 0;) {
            code = code * static_cast<std::size_t>(m_caps[c] + 1) + static_cast<std::size_t>(s.n[c]);
        }
        return code;
    }

    Capacities m_caps;
    PolicyKind m_policy;
    std::vector<CtmcState> m_states;
    std::vector<std::size_t> m_offset;
};

inline constexpr std::uint64_t kDefaultMaxStates = 2'000'000;

inline StateSpace build_state_space(const Capacities &caps, PolicyKind policy,
                                    std::uint64_t max_states = kDefaultMaxStates) {
    const std::uint64_t count = count_states(caps, policy);
    if (count > max_states) {
        throw SizeError("state space has " + std::to_string(count) +
                            " states, above the ceiling of " + std::to_string(max_states),
                        static_cast<std::size_t>(count));
    }
    return StateSpace(caps, policy);
}

using Generator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Visits every off-diagonal transition (from, to, rate) with rate > 0.
///
/// Arrivals of class c go to the macro BS with rate lambda_c (1 - p_c) and
/// to a femto with rate lambda_c p_c (n_h also grows); both are lost when
/// n_c is at capacity. Departures of class c occur at rate n_c mu_c. For a
/// femto-eligible class the departing call is femto-resident with weight
/// n_h / E(s), since n_h does not record which classes the femto calls
/// belong to.
template <typename Visit>
void for_each_transition(const StateSpace &space, const TrafficModel &traffic, Visit &&visit) {
    traffic.validate(space.policy());
    const Capacities &caps = space.capacities();
    auto emit = [&](std::size_t from, const CtmcState &target, double rate) {
        if (rate < 0.0 || !std::isfinite(rate)) {
            throw std::logic_error("generator: negative or non-finite transition rate");
        }
        if (rate == 0.0) {
            return;
        }
        const auto to = space.index_of(target);
        if (!to) {
            throw std::logic_error("generator: transition leaves the state space");
        }
        visit(from, *to, rate);
    };
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CtmcState &s = space[i];
        const int eligible = space.eligible_count(s);
        for (ServiceClass cls : kAllClasses) {
            const std::size_t c = index_of(cls);
            if (s.n[c] < caps[c]) {
                CtmcState to_macro = s;
                ++to_macro.n[c];
                emit(i, to_macro, traffic.lambda[c] * (1.0 - traffic.p_ho[c]));
                CtmcState to_femto = to_macro;
                ++to_femto.n_h;
                emit(i, to_femto, traffic.lambda[c] * traffic.p_ho[c]);
            }
            if (s.n[c] > 0) {
                const double rate = s.n[c] * traffic.mu[c];
                const double femto_share =
                    femto_eligible(space.policy(), cls) && eligible > 0
                        ? static_cast<double>(s.n_h) / static_cast<double>(eligible)
                        : 0.0;
                CtmcState from_macro = s;
                --from_macro.n[c];
                emit(i, from_macro, rate * (1.0 - femto_share));
                CtmcState from_femto = from_macro;
                --from_femto.n_h;
                emit(i, from_femto, rate * femto_share);
            }
        }
    }
}

inline Generator build_generator(const StateSpace &space, const TrafficModel &traffic) {
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> triplets;
    std::vector<double> outflow(space.size(), 0.0);
    triplets.reserve(space.size() * 2 * (2 * kNumClasses) + space.size());
    for_each_transition(space, traffic, [&](std::size_t from, std::size_t to, double rate) {
        triplets.emplace_back(static_cast<int>(from), static_cast<int>(to), rate);
        outflow[from] += rate;
    });
    for (std::size_t i = 0; i < space.size(); ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), -outflow[i]);
    }
    const auto n = static_cast<Eigen::Index>(space.size());
    Generator q(n, n);
    q.setFromTriplets(triplets.begin(), triplets.end());
    q.makeCompressed();
    return q;
}

struct SolverOptions {
    double tolerance = 1e-10;
    std::size_t direct_limit = 50'000;
    std::size_t max_iterations = 2'000'000;
};

struct SteadyState {
    Eigen::VectorXd pi;
    double residual = 0.0;
    bool direct = true;
    std::size_t iterations = 0;

    double operator[](std::size_t i) const { return pi[static_cast<Eigen::Index>(i)]; }
};

/// max_j |(pi Q)_j|
inline double stationary_residual(const Generator &q, const Eigen::VectorXd &pi) {
    const Eigen::VectorXd r = q.transpose() * pi;
    return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

namespace detail {

// Fixes pi[pivot] = 1 and solves the remaining balance equations
// (Q^T without the pivot row and column), then normalizes. This keeps the
// system as sparse as Q itself.
inline Eigen::VectorXd solve_direct(const Generator &q, Eigen::Index pivot) {
    const Eigen::Index n = q.rows();
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    pi[pivot] = 1.0;
    if (n == 1) {
        return pi;
    }
    auto reduced = [pivot](Eigen::Index i) { return i < pivot ? i : i - 1; };
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(q.nonZeros()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n - 1);
    for (Eigen::Index row = 0; row < q.outerSize(); ++row) {
        for (Generator::InnerIterator it(q, row); it; ++it) {
            if (it.col() == pivot) {
                continue;
            }
            if (row == pivot) {
                b[reduced(it.col())] -= it.value();
            } else {
                triplets.emplace_back(reduced(it.col()), reduced(row), it.value());
            }
        }
    }
    Eigen::SparseMatrix<double> a(n - 1, n - 1);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
        throw SolverError("steady state: sparse LU factorization failed (" + lu.lastErrorMessage() +
                              ")",
                          std::numeric_limits<double>::infinity());
    }
    const Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) {
        throw SolverError("steady state: sparse LU solve failed",
                          std::numeric_limits<double>::infinity());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i != pivot) {
            pi[i] = x[reduced(i)];
        }
    }
    return pi / pi.sum();
}

// Power iteration on the uniformized chain P = I + Q / Lambda.
inline Eigen::VectorXd solve_uniformized(const Generator &q, const SolverOptions &options,
                                         std::size_t &iterations) {
    const Eigen::Index n = q.rows();
    const double lambda = 1.05 * (-q.diagonal()).maxCoeff();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const Generator qt_scaled = Generator(q.transpose()) / lambda;
    double residual = std::numeric_limits<double>::infinity();
    for (iterations = 1; iterations <= options.max_iterations; ++iterations) {
        const Eigen::VectorXd step = qt_scaled * pi;
        pi += step;
        if (iterations % 64 == 0) {
            pi /= pi.sum();
            residual = stationary_residual(q, pi);
            if (residual <= options.tolerance) {
                return pi;
            }
        }
    }
    throw SolverError("steady state: uniformization did not converge within " +
                          std::to_string(options.max_iterations) + " iterations",
                      residual);
}

} // namespace detail

namespace detail {

// States reachable from root along positive rates, in increasing index order.
inline std::vector<Eigen::Index> reachable_from(const Generator &q, Eigen::Index root) {
    std::vector<char> seen(static_cast<std::size_t>(q.rows()), 0);
    std::vector<Eigen::Index> stack{root};
    seen[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
        const Eigen::Index s = stack.back();
        stack.pop_back();
        for (Generator::InnerIterator it(q, s); it; ++it) {
            if (it.col() != s && it.value() > 0.0 && !seen[static_cast<std::size_t>(it.col())]) {
                seen[static_cast<std::size_t>(it.col())] = 1;
                stack.push_back(it.col());
            }
        }
    }
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        if (seen[static_cast<std::size_t>(i)]) {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace detail

/// Stationary distribution of \p q. \p root must be recurrent (for the
/// network chain the empty state is: every state drains to it); the solve is
/// restricted to the closed class reachable from it and every other state
/// gets probability exactly 0. Small chains use a direct sparse solve,
/// larger ones uniformization. Throws SolverError when the residual
/// max|pi Q| exceeds the tolerance.
inline SteadyState solve_steady_state(const Generator &q, const SolverOptions &options = {},
                                      std::size_t root = 0) {
    if (q.rows() == 0 || q.rows() != q.cols() || root >= static_cast<std::size_t>(q.rows())) {
        throw SolverError("steady state: generator must be square and non-empty", 0.0);
    }
    const auto closed = detail::reachable_from(q, static_cast<Eigen::Index>(root));
    const auto m = static_cast<Eigen::Index>(closed.size());
    Generator sub;
    if (m == q.rows()) {
        sub = q;
    } else {
        std::vector<Eigen::Index> position(static_cast<std::size_t>(q.rows()), -1);
        for (Eigen::Index k = 0; k < m; ++k) {
            position[static_cast<std::size_t>(closed[static_cast<std::size_t>(k)])] = k;
        }
        std::vector<Eigen::Triplet<double>> triplets;
        for (Eigen::Index k = 0; k < m; ++k) {
            for (Generator::InnerIterator it(q, closed[static_cast<std::size_t>(k)]); it; ++it) {
                const Eigen::Index to = position[static_cast<std::size_t>(it.col())];
                if (to < 0) {
                    if (it.value() != 0.0) {
                        throw SolverError("steady state: root is not recurrent", 0.0);
                    }
                    continue;
                }
                triplets.emplace_back(k, to, it.value());
            }
        }
        sub.resize(m, m);
        sub.setFromTriplets(triplets.begin(), triplets.end());
        sub.makeCompressed();
    }

    Eigen::VectorXd pi_sub;
    SteadyState out;
    if (static_cast<std::size_t>(m) <= options.direct_limit) {
        const auto pivot = static_cast<Eigen::Index>(
            std::lower_bound(closed.begin(), closed.end(), static_cast<Eigen::Index>(root)) -
            closed.begin());
        pi_sub = detail::solve_direct(sub, pivot);
        out.direct = true;
    } else {
        pi_sub = detail::solve_uniformized(sub, options, out.iterations);
        out.direct = false;
    }
    // Round-off can leave tiny negative entries.
    pi_sub = pi_sub.cwiseMax(0.0);
    pi_sub /= pi_sub.sum();
    out.pi = Eigen::VectorXd::Zero(q.rows());
    for (Eigen::Index k = 0; k < m; ++k) {
        out.pi[closed[static_cast<std::size_t>(k)]] = pi_sub[k];
    }
    out.residual = stationary_residual(q, out.pi);
    if (!(out.residual <= options.tolerance)) {
        throw SolverError("steady state: residual " + std::to_string(out.residual) +
                              " exceeds tolerance",
                          out.residual);
    }
    return out;
}

/// Stationary mean of n_h. Reported under the name "handoff probability",
/// although it is an expectation and may exceed 1.
inline double handoff_probability(const StateSpace &space, const SteadyState &ss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        acc += space[i].n_h * ss[i];
    }
    return acc;
}

/// Mean fraction of in-system calls that are macro-resident; the empty
/// state contributes nothing.
inline double macro_load(const StateSpace &space, const SteadyState &ss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const int t = space[i].total();
        if (t > 0) {
            acc += static_cast<double>(t - space[i].n_h) / t * ss[i];
        }
    }
    return acc;
}

inline double femto_load(const StateSpace &space, const SteadyState &ss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const int t = space[i].total();
        if (t > 0) {
            acc += static_cast<double>(space[i].n_h) / t * ss[i];
        }
    }
    return acc;
}

inline double empty_probability(const StateSpace &space, const SteadyState &ss) {
    return ss[space.empty_index()];
}

/// Probability an arrival of class c is lost (Poisson arrivals see time
/// averages, so this is pi(n_c = C_c)).
inline std::array<double, kNumClasses> blocking_probability(const StateSpace &space,
                                                            const SteadyState &ss) {
    std::array<double, kNumClasses> out{};
    for (std::size_t i = 0; i < space.size(); ++i) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (space[i].n[c] == space.capacities()[c]) {
                out[c] += ss[i];
            }
        }
    }
    return out;
}

/// Stationary marginal of class c's call count.
inline std::vector<double> class_marginal(const StateSpace &space, const SteadyState &ss,
                                          ServiceClass cls) {
    const std::size_t c = index_of(cls);
    std::vector<double> out(static_cast<std::size_t>(space.capacities()[c] + 1), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        out[static_cast<std::size_t>(space[i].n[c])] += ss[i];
    }
    return out;
}

struct ChainMetrics {
    double handoff_probability = 0.0;
    double macro_load = 0.0;
    double femto_load = 0.0;
    double empty_probability = 0.0;
    double mean_occupancy = 0.0;
    std::array<double, kNumClasses> blocking{};
    double residual = 0.0;
    std::size_t states = 0;
};

inline ChainMetrics evaluate_metrics(const StateSpace &space, const SteadyState &ss) {
    ChainMetrics m;
    m.handoff_probability = handoff_probability(space, ss);
    m.macro_load = macro_load(space, ss);
    m.femto_load = femto_load(space, ss);
    m.empty_probability = empty_probability(space, ss);
    for (std::size_t i = 0; i < space.size(); ++i) {
        m.mean_occupancy += space[i].total() * ss[i];
    }
    m.blocking = blocking_probability(space, ss);
    m.residual = ss.residual;
    m.states = space.size();
    return m;
}

/// Build, solve and summarize in one go.
inline ChainMetrics solve_chain(const Capacities &caps, PolicyKind policy,
                                const TrafficModel &traffic, const SolverOptions &options = {},
                                std::uint64_t max_states = kDefaultMaxStates) {
    const StateSpace space = build_state_space(caps, policy, max_states);
    const SteadyState ss =
        solve_steady_state(build_generator(space, traffic), options, space.empty_index());
    return evaluate_metrics(space, ss);
}

/// One row per state: n_u,n_r,n_n,n_b,n_h,probability.
inline void write_distribution_csv(std::ostream &os, const StateSpace &space,
                                   const SteadyState &ss) {
    os << "n_u,n_r,n_n,n_b,n_h,probability\n";
    const auto old_precision = os.precision(17);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CtmcState &s = space[i];
        os << s.n[0] << ',' << s.n[1] << ',' << s.n[2] << ',' << s.n[3] << ',' << s.n_h << ','
           << ss[i] << '\n';
    }
    os.precision(old_precision);
}

} // namespace hetnet

#endif
