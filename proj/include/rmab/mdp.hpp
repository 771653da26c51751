#pragma once

// Finite discounted single-arm MDP machinery for the Lagrangian-decoupled
// problem: binary actions, a per-activation cost lambda, Bellman backups,
// value iteration and exact finite-horizon policy evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rmab/errors.hpp"

namespace rmab {

using State = std::size_t;
using Action = int;  // 0 = passive, 1 = active
inline constexpr std::size_t kNumActions = 2;

inline constexpr double kStochasticTolerance = 1e-9;

namespace detail {
inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}
inline void check_action(Action a) { require(a == 0 || a == 1, "action must be 0 or 1"); }
inline void check_gamma(double gamma) {
    require(gamma >= 0.0 && gamma < 1.0, "discount factor must lie in [0, 1)");
}
}  // namespace detail

/// Probability table P(s'|s,a), immutable after construction.
class TransitionKernel {
public:
    struct Entry {
        State next;
        double prob;
    };

    /// `dense` is laid out as [s][a][s'] with size n*2*n.
    TransitionKernel(std::size_t num_states, std::vector<double> dense)
        : n_(num_states), p_(std::move(dense)) {
        detail::require(n_ >= 1, "state space must contain at least one state");
        detail::require(p_.size() == n_ * kNumActions * n_, "kernel table has wrong size");
        for (State s = 0; s < n_; ++s) {
            for (Action a = 0; a < 2; ++a) {
                double sum = 0.0;
                for (double v : row(s, a)) {
                    detail::require(std::isfinite(v) && v >= -kStochasticTolerance && v <= 1.0 + kStochasticTolerance,
                                    "kernel entry outside [0,1]");
                    sum += v;
                }
                detail::require(std::abs(sum - 1.0) <= kStochasticTolerance,
                                "kernel row (" + std::to_string(s) + "," + std::to_string(a)
                                    + ") sums to " + std::to_string(sum));
            }
        }
        for (auto& v : p_) v = std::clamp(v, 0.0, 1.0);
        build_support();
    }

    /// Builds a kernel from per-(s,a) rows; rows[s][a] has n entries.
    static TransitionKernel from_rows(const std::vector<std::array<std::vector<double>, 2>>& rows) {
        const std::size_t n = rows.size();
        std::vector<double> dense;
        dense.reserve(n * 2 * n);
        for (const auto& pair : rows) {
            for (const auto& r : pair) {
                detail::require(r.size() == n, "kernel row has wrong length");
                dense.insert(dense.end(), r.begin(), r.end());
            }
        }
        return TransitionKernel(n, std::move(dense));
    }

    std::size_t num_states() const noexcept { return n_; }

    double operator()(State s, Action a, State next) const { return p_[offset(s, a) + next]; }

    std::span<const double> row(State s, Action a) const { return {p_.data() + offset(s, a), n_}; }

    /// Nonzero entries of row (s,a) in increasing next-state order.
    std::span<const Entry> support(State s, Action a) const {
        const auto k = s * kNumActions + static_cast<std::size_t>(a);
        return {support_.data() + support_begin_[k], support_begin_[k + 1] - support_begin_[k]};
    }

    std::span<const double> dense() const noexcept { return p_; }

    bool operator==(const TransitionKernel& other) const { return n_ == other.n_ && p_ == other.p_; }

private:
    std::size_t offset(State s, Action a) const { return (s * kNumActions + static_cast<std::size_t>(a)) * n_; }

    void build_support() {
        support_begin_.assign(n_ * kNumActions + 1, 0);
        for (State s = 0; s < n_; ++s) {
            for (Action a = 0; a < 2; ++a) {
                const auto r = row(s, a);
                for (State j = 0; j < n_; ++j) {
                    if (r[j] > 0.0) support_.push_back({j, r[j]});
                }
                support_begin_[s * kNumActions + static_cast<std::size_t>(a) + 1] = support_.size();
            }
        }
    }

    std::size_t n_;
    std::vector<double> p_;
    std::vector<Entry> support_;
    std::vector<std::size_t> support_begin_;
};

/// Reward r(s,a) for both actions of every state.
class RewardTable {
public:
    explicit RewardTable(std::vector<std::array<double, 2>> r) : r_(std::move(r)) {
        detail::require(!r_.empty(), "reward table must cover at least one state");
        for (const auto& pair : r_) {
            detail::require(std::isfinite(pair[0]) && std::isfinite(pair[1]), "rewards must be finite");
        }
    }

    /// Action-independent rewards r(s,0) = r(s,1) = values[s].
    static RewardTable state_only(std::span<const double> values) {
        std::vector<std::array<double, 2>> r;
        r.reserve(values.size());
        for (double v : values) r.push_back({v, v});
        return RewardTable(std::move(r));
    }

    std::size_t num_states() const noexcept { return r_.size(); }
    double operator()(State s, Action a) const { return r_[s][static_cast<std::size_t>(a)]; }

    double max() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& p : r_) m = std::max({m, p[0], p[1]});
        return m;
    }
    double min() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& p : r_) m = std::min({m, p[0], p[1]});
        return m;
    }

    /// Every reward multiplied by `scale` and then shifted by `shift`.
    RewardTable affine(double scale, double shift) const {
        auto r = r_;
        for (auto& p : r) {
            p[0] = scale * p[0] + shift;
            p[1] = scale * p[1] + shift;
        }
        return RewardTable(std::move(r));
    }

private:
    std::vector<std::array<double, 2>> r_;
};

/// V and Q of one arm at a given activation cost and discount.
struct ValueFunctions {
    std::vector<double> v;
    std::vector<std::array<double, 2>> q;
    double lambda = 0.0;
    double gamma = 0.0;

    static ValueFunctions zeros(std::size_t n, double lambda = 0.0, double gamma = 0.0) {
        return {std::vector<double>(n, 0.0), std::vector<std::array<double, 2>>(n, {0.0, 0.0}), lambda, gamma};
    }

    std::size_t num_states() const noexcept { return v.size(); }

    /// Q(s,1) - Q(s,0).
    double advantage(State s) const { return q[s][1] - q[s][0]; }

    /// Greedy action, preferring the passive action on exact ties.
    Action greedy_action(State s) const { return q[s][1] > q[s][0] ? 1 : 0; }

    std::vector<Action> greedy_policy() const {
        std::vector<Action> pi(v.size());
        for (State s = 0; s < v.size(); ++s) pi[s] = greedy_action(s);
        return pi;
    }
};

namespace detail {
inline void check_shapes(const TransitionKernel& kernel, const RewardTable& rewards) {
    require(kernel.num_states() == rewards.num_states(), "kernel and reward table disagree on |S|");
}

// One backup from `v_prev` into `out`; returns sup-norm change of V.
inline double backup_into(std::span<const double> v_prev, const TransitionKernel& kernel, const RewardTable& rewards,
                          double lambda, double gamma, ValueFunctions& out) {
    const std::size_t n = kernel.num_states();
    double residual = 0.0;
    for (State s = 0; s < n; ++s) {
        for (Action a = 0; a < 2; ++a) {
            double ev = 0.0;
            for (const auto& e : kernel.support(s, a)) ev += e.prob * v_prev[e.next];
            out.q[s][static_cast<std::size_t>(a)] = rewards(s, a) - lambda * a + gamma * ev;
        }
        const double v = std::max(out.q[s][0], out.q[s][1]);
        residual = std::max(residual, std::abs(v - v_prev[s]));
        out.v[s] = v;
    }
    return residual;
}
}  // namespace detail

/// Q(s,a) = r(s,a) - lambda*a + gamma * sum_{s'} P(s'|s,a) max_a' Q_prev(s',a').
inline ValueFunctions bellman_backup(const ValueFunctions& prev, const TransitionKernel& kernel,
                                     const RewardTable& rewards, double lambda, double gamma) {
    detail::check_shapes(kernel, rewards);
    detail::check_gamma(gamma);
    detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and nonnegative");
    detail::require(prev.num_states() == kernel.num_states(), "previous value function has wrong size");
    auto out = ValueFunctions::zeros(kernel.num_states(), lambda, gamma);
    detail::backup_into(prev.v, kernel, rewards, lambda, gamma, out);
    return out;
}

struct ValueIterationOptions {
    double tol = 1e-8;
    std::size_t max_iterations = 100000;
    /// Initial V; zeros when empty.
    std::span<const double> warm_start = {};
    /// Allow negative lambda (Whittle searches below zero).
    bool allow_negative_lambda = false;
};

struct ValueIterationResult {
    ValueFunctions values;
    std::vector<double> residuals;
};

/// Sup-norm threshold on successive iterates guaranteeing V within `tol` of the fixpoint.
inline double stopping_threshold(double tol, double gamma) {
    if (gamma == 0.0) return std::numeric_limits<double>::infinity();
    return tol * (1.0 - gamma) / (2.0 * gamma);
}

namespace detail {
inline ValueFunctions run_value_iteration(const TransitionKernel& kernel, const RewardTable& rewards, double lambda,
                                          double gamma, const ValueIterationOptions& options,
                                          std::vector<double>* residuals) {
    check_shapes(kernel, rewards);
    check_gamma(gamma);
    require(options.tol > 0.0, "value iteration tolerance must be positive");
    require(std::isfinite(lambda) && (options.allow_negative_lambda || lambda >= 0.0),
            "lambda must be finite and nonnegative");
    const std::size_t n = kernel.num_states();

    auto cur = ValueFunctions::zeros(n, lambda, gamma);
    std::vector<double> prev(n, 0.0);
    if (!options.warm_start.empty()) {
        require(options.warm_start.size() == n, "warm start has wrong size");
        prev.assign(options.warm_start.begin(), options.warm_start.end());
    }
    const double threshold = stopping_threshold(options.tol, gamma);
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const double residual = backup_into(prev, kernel, rewards, lambda, gamma, cur);
        if (residuals) residuals->push_back(residual);
        // Contraction: |V_{k+1}-V_k| <= gamma |V_k-V_{k-1}|.
        if (residual > gamma * last + 1e-12 * (1.0 + last)) {
            throw std::logic_error("value iteration residual violated the contraction bound");
        }
        last = residual;
        if (residual <= threshold) return cur;
        std::copy(cur.v.begin(), cur.v.end(), prev.begin());
    }
    throw NonConvergence(options.max_iterations, last);
}
}  // namespace detail

/// Iterates bellman_backup until the sup-norm change is at most tol(1-gamma)/(2 gamma),
/// which puts V within `tol` of the fixpoint.
inline ValueFunctions value_iteration(const TransitionKernel& kernel, const RewardTable& rewards, double lambda,
                                      double gamma, const ValueIterationOptions& options = {}) {
    return detail::run_value_iteration(kernel, rewards, lambda, gamma, options, nullptr);
}

/// value_iteration that also returns the residual of every sweep.
inline ValueIterationResult value_iteration_traced(const TransitionKernel& kernel, const RewardTable& rewards,
                                                   double lambda, double gamma,
                                                   const ValueIterationOptions& options = {}) {
    ValueIterationResult result;
    result.values = detail::run_value_iteration(kernel, rewards, lambda, gamma, options, &result.residuals);
    return result;
}

/// Exact E[sum_{h=1..H} gamma^{h-1} (r(s_h,a_h) - lambda a_h)] from `start`
/// under a stationary deterministic policy, by propagating the state
/// distribution forward.
inline double policy_evaluation(std::span<const Action> policy, const TransitionKernel& kernel,
                                const RewardTable& rewards, double lambda, double gamma, std::size_t horizon,
                                State start) {
    detail::check_shapes(kernel, rewards);
    detail::check_gamma(gamma);
    const std::size_t n = kernel.num_states();
    detail::require(policy.size() == n, "policy must assign an action to every state");
    detail::require(horizon >= 1, "horizon must be positive");
    detail::require(start < n, "start state out of range");
    for (Action a : policy) detail::check_action(a);

    std::vector<double> dist(n, 0.0), next(n, 0.0);
    dist[start] = 1.0;
    double total = 0.0;
    double discount = 1.0;
    for (std::size_t h = 0; h < horizon; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (State s = 0; s < n; ++s) {
            if (dist[s] == 0.0) continue;
            const Action a = policy[s];
            total += discount * dist[s] * (rewards(s, a) - lambda * a);
            for (const auto& e : kernel.support(s, a)) next[e.next] += dist[s] * e.prob;
        }
        dist.swap(next);
        discount *= gamma;
    }
    return total;
}

}  // namespace rmab
