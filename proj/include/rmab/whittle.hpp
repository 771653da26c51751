#pragma once

// Whittle indices of a single arm.
//
// The generic route searches the activation cost lambda at which
// Q(s,1) = Q(s,0) by bisection, solving the decoupled MDP by value
// iteration at every probe. The AoI routes exploit the threshold structure
// of age-of-information arms and evaluate the two competing threshold
// policies in closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

#include "rmab/mdp.hpp"
#include "rmab/random.hpp"

namespace rmab {

/// Stable 64-bit fingerprint of a kernel's probability table.
inline std::uint64_t kernel_fingerprint(const TransitionKernel& kernel) {
    std::uint64_t h = splitmix64(kernel.num_states());
    for (double v : kernel.dense()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    return h;
}

struct WhittleIndexTable {
    std::vector<double> w;
    std::uint64_t kernel_id = 0;

    double operator()(State s) const { return w[s]; }
    std::size_t size() const noexcept { return w.size(); }
};

struct IndexabilityReport {
    bool indexable = true;
    std::vector<double> lambda_grid;
    std::vector<std::size_t> active_set_sizes;
    std::vector<std::vector<State>> active_sets;
};

struct WhittleOptions {
    double search_tol = 1e-4;
    double lambda_lo = 0.0;
    /// Defaults to (max r - min r) / (1 - gamma).
    std::optional<double> lambda_max;
    ValueIterationOptions vi;
};

/// States where activating is strictly optimal at cost lambda: {s : Q(s,1) > Q(s,0)}.
inline std::vector<State> activate_set(const TransitionKernel& kernel, const RewardTable& rewards, double lambda,
                                       double gamma, const ValueIterationOptions& vi = {}) {
    const auto values = value_iteration(kernel, rewards, lambda, gamma, vi);
    std::vector<State> set;
    for (State s = 0; s < values.num_states(); ++s) {
        if (values.greedy_action(s) == 1) set.push_back(s);
    }
    return set;
}

/// Checks that the activate sets shrink and stay nested as lambda grows along `lambda_grid`.
inline IndexabilityReport indexability_probe(const TransitionKernel& kernel, const RewardTable& rewards,
                                             double gamma, std::span<const double> lambda_grid,
                                             const ValueIterationOptions& vi = {}) {
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        detail::require(lambda_grid[i] >= 0.0, "lambda grid must be nonnegative");
        detail::require(i == 0 || lambda_grid[i] > lambda_grid[i - 1], "lambda grid must be strictly increasing");
    }
    IndexabilityReport report;
    report.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    for (double lambda : lambda_grid) {
        auto set = activate_set(kernel, rewards, lambda, gamma, vi);
        if (!report.active_sets.empty()) {
            const auto& prev = report.active_sets.back();
            if (set.size() > prev.size() || !std::includes(prev.begin(), prev.end(), set.begin(), set.end())) {
                report.indexable = false;
            }
        }
        report.active_set_sizes.push_back(set.size());
        report.active_sets.push_back(std::move(set));
    }
    return report;
}

inline double default_lambda_max(const RewardTable& rewards, double gamma) {
    return (rewards.max() - rewards.min()) / (1.0 - gamma);
}

namespace detail {
class AdvantageProbe {
public:
    AdvantageProbe(const TransitionKernel& kernel, const RewardTable& rewards, double gamma,
                   const ValueIterationOptions& vi)
        : kernel_(kernel), rewards_(rewards), gamma_(gamma), vi_(vi) {
        vi_.allow_negative_lambda = true;
    }

    /// Full solution at lambda, warm-started from the previous probe.
    const ValueFunctions& solve(double lambda) {
        auto opts = vi_;
        if (last_) opts.warm_start = last_->v;
        last_ = value_iteration(kernel_, rewards_, lambda, gamma_, opts);
        return *last_;
    }

    double operator()(State s, double lambda) { return solve(lambda).advantage(s); }

private:
    const TransitionKernel& kernel_;
    const RewardTable& rewards_;
    double gamma_;
    ValueIterationOptions vi_;
    std::optional<ValueFunctions> last_;
};

inline double bisect_index(AdvantageProbe& delta, State state, double lo, double hi, const WhittleOptions& options) {
    const double zero_tol = 2.0 * options.vi.tol;
    const double d_lo = delta(state, lo);
    if (std::abs(d_lo) <= zero_tol) return lo;
    if (hi <= lo) hi = lo + options.search_tol;
    const double d_hi = delta(state, hi);
    if (d_lo < 0.0 || d_hi > 0.0) throw BracketError(lo, d_lo, hi, d_hi);
    // Invariant: delta(lo) > 0 >= delta(hi); converges to the leftmost root.
    while (hi - lo > options.search_tol) {
        const double mid = 0.5 * (lo + hi);
        if (delta(state, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}
}  // namespace detail

/// inf{lambda : Q(s,0) = Q(s,1)} located by bisection to width `search_tol`.
///
/// The arm is assumed indexable; run indexability_probe once per kernel family.
inline double whittle_index(const TransitionKernel& kernel, const RewardTable& rewards, double gamma, State state,
                            const WhittleOptions& options = {}) {
    detail::check_shapes(kernel, rewards);
    detail::check_gamma(gamma);
    detail::require(state < kernel.num_states(), "state out of range");
    detail::require(options.search_tol > 0.0, "search tolerance must be positive");
    const double hi = options.lambda_max.value_or(default_lambda_max(rewards, gamma));
    detail::AdvantageProbe delta(kernel, rewards, gamma, options.vi);
    return detail::bisect_index(delta, state, options.lambda_lo, hi, options);
}

/// Indices of every state, sharing warm starts across the searches.
inline WhittleIndexTable whittle_index_table(const TransitionKernel& kernel, const RewardTable& rewards,
                                             double gamma, const WhittleOptions& options = {}) {
    detail::check_shapes(kernel, rewards);
    detail::check_gamma(gamma);
    detail::require(options.search_tol > 0.0, "search tolerance must be positive");
    const double hi = options.lambda_max.value_or(default_lambda_max(rewards, gamma));
    detail::AdvantageProbe delta(kernel, rewards, gamma, options.vi);
    WhittleIndexTable table{std::vector<double>(kernel.num_states()), kernel_fingerprint(kernel)};
    for (State s = 0; s < kernel.num_states(); ++s) {
        table.w[s] = detail::bisect_index(delta, s, options.lambda_lo, hi, options);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Age of information

/// Mutual-information reward -log2(1 - sigma2^age) / 2 of a Gaussian source.
inline double aoi_reward(double sigma2, std::size_t age) {
    detail::require(sigma2 > 0.0 && sigma2 < 1.0, "sigma2 must lie in (0,1)");
    detail::require(age >= 1, "age must be at least 1");
    return -std::log2(1.0 - std::pow(sigma2, static_cast<double>(age))) / 2.0;
}

namespace detail {
// sum_{j>=0} ratio^j r(start + j), truncated once terms are negligible.
inline double discounted_reward_tail(double sigma2, std::size_t start, double ratio) {
    double total = 0.0;
    double weight = 1.0;
    for (std::size_t j = 0; j < 1000000; ++j) {
        const double term = weight * aoi_reward(sigma2, start + j);
        total += term;
        if (term < 1e-17 * std::max(1.0, std::abs(total))) break;
        weight *= ratio;
        if (weight == 0.0) break;
    }
    return total;
}

// Affine function c0 + c1 * lambda.
struct Affine {
    double c0 = 0.0;
    double c1 = 0.0;
};

inline double crossing(Affine a, Affine b) { return (b.c0 - a.c0) / (a.c1 - b.c1); }
}  // namespace detail

/// Closed-form Whittle index of an AoI arm with success probability q at age `age`.
///
/// With gamma = 1 (default) this is the average-reward index from the
/// renewal-reward comparison of the threshold policies "activate from age h"
/// and "activate from age h+1":
///
///   W(h) = q * (G(h) - (h - 1 + 1/q) * (G(h+1) - G(h))),
///   G(h) = sum_{s<h} r(s) + sum_{j>=0} (1-q)^j r(h+j),
///
/// the gamma -> 1 limit of the discounted index. With gamma < 1 the same two
/// threshold policies are compared under discounting on the untruncated
/// chain, which gives the exact discounted index.
inline double aoi_closed_form_index(double q, double sigma2, std::size_t age, double gamma = 1.0) {
    detail::require(q > 0.0 && q <= 1.0, "success probability must lie in (0,1]");
    detail::require(sigma2 > 0.0 && sigma2 < 1.0, "sigma2 must lie in (0,1)");
    detail::require(age >= 1, "age must be at least 1");
    detail::require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0,1]");
    const double h = static_cast<double>(age);

    if (gamma == 1.0) {
        auto g = [&](std::size_t threshold) {
            double head = 0.0;
            for (std::size_t s = 1; s < threshold; ++s) head += aoi_reward(sigma2, s);
            return head + detail::discounted_reward_tail(sigma2, threshold, 1.0 - q);
        };
        const double g_h = g(age);
        const double g_next = g(age + 1);
        return q * (g_h - (h - 1.0 + 1.0 / q) * (g_next - g_h));
    }

    const double beta = gamma * (1.0 - q);
    // Value at age `at` (at >= threshold) under "activate iff age >= threshold".
    auto active_value = [&](std::size_t threshold) {
        double head = 0.0;
        double disc = 1.0;
        for (std::size_t s = 1; s < threshold; ++s) {
            head += disc * aoi_reward(sigma2, s);
            disc *= gamma;
        }
        // disc = gamma^{threshold-1}
        const double tail = detail::discounted_reward_tail(sigma2, threshold, beta);
        const double denom = 1.0 - disc * gamma * q / (1.0 - beta);
        // V(1) = (head + disc * (tail - lambda/(1-beta))) / denom
        const detail::Affine v1{(head + disc * tail) / denom, -disc / (1.0 - beta) / denom};
        // U(threshold) = tail + (gamma q V(1) - lambda) / (1 - beta)
        return detail::Affine{tail + gamma * q * v1.c0 / (1.0 - beta), (gamma * q * v1.c1 - 1.0) / (1.0 - beta)};
    };
    const detail::Affine activate_now = active_value(age);
    const detail::Affine later = active_value(age + 1);
    const detail::Affine wait{aoi_reward(sigma2, age) + gamma * later.c0, gamma * later.c1};
    return detail::crossing(activate_now, wait);
}

/// Per-age success probabilities of an AoI-structured kernel (state i is age i+1).
///
/// Passive rows must move deterministically to min(i+1, K-1); active rows may
/// only reach state 0 (delivery) or min(i+1, K-1).
inline std::vector<double> aoi_success_probabilities(const TransitionKernel& kernel) {
    const std::size_t k = kernel.num_states();
    detail::require(k >= 2, "AoI kernel needs at least two ages");
    std::vector<double> q(k);
    for (State s = 0; s < k; ++s) {
        const State up = std::min(s + 1, k - 1);
        detail::require(std::abs(kernel(s, 0, up) - 1.0) <= kStochasticTolerance,
                        "passive AoI rows must increment the age deterministically");
        for (const auto& e : kernel.support(s, 1)) {
            detail::require(e.next == 0 || e.next == up, "active AoI rows may only reset or increment the age");
        }
        q[s] = up == 0 ? 1.0 : kernel(s, 1, 0);
    }
    return q;
}

/// Whittle indices of an AoI-structured truncated kernel with per-age success
/// probabilities, computed by comparing threshold policies in closed form.
///
/// For each age h the index is the lambda at which "activate from age h" and
/// "activate from age h+1" have equal discounted value at h. Each threshold
/// policy's values are affine in lambda and obtained by one backward sweep.
inline WhittleIndexTable aoi_index_table(const TransitionKernel& kernel, const RewardTable& rewards, double gamma) {
    detail::check_shapes(kernel, rewards);
    detail::check_gamma(gamma);
    const std::size_t k = kernel.num_states();
    const auto q = aoi_success_probabilities(kernel);

    // Values of "activate iff state >= threshold" as affine functions of lambda.
    // Each V(s) is tracked as c0 + c1*lambda + cv*V(0), then V(0) is eliminated.
    struct Term {
        double c0, c1, cv;
    };
    std::vector<Term> terms(k);
    auto threshold_values = [&](std::size_t threshold, std::vector<detail::Affine>& out) {
        const State cap = k - 1;
        if (threshold <= cap) {
            const double denom = 1.0 - gamma * (1.0 - q[cap]);
            terms[cap] = {rewards(cap, 1) / denom, -1.0 / denom, gamma * q[cap] / denom};
        } else {
            terms[cap] = {rewards(cap, 0) / (1.0 - gamma), 0.0, 0.0};
        }
        for (std::size_t i = cap; i-- > 0;) {
            const Term& up = terms[i + 1];
            if (i >= threshold) {
                const double stay = gamma * (1.0 - q[i]);
                terms[i] = {rewards(i, 1) + stay * up.c0, -1.0 + stay * up.c1, gamma * q[i] + stay * up.cv};
            } else {
                terms[i] = {rewards(i, 0) + gamma * up.c0, gamma * up.c1, gamma * up.cv};
            }
        }
        const double denom = 1.0 - terms[0].cv;
        const detail::Affine v0{terms[0].c0 / denom, terms[0].c1 / denom};
        out.resize(k);
        for (State s = 0; s < k; ++s) {
            out[s] = {terms[s].c0 + terms[s].cv * v0.c0, terms[s].c1 + terms[s].cv * v0.c1};
        }
    };

    WhittleIndexTable table{std::vector<double>(k), kernel_fingerprint(kernel)};
    std::vector<detail::Affine> now, later;
    threshold_values(0, now);
    for (State s = 0; s < k; ++s) {
        threshold_values(s + 1, later);
        table.w[s] = detail::crossing(now[s], later[s]);
        now.swap(later);
    }
    return table;
}

}  // namespace rmab
