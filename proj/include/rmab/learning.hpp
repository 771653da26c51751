#pragma once

// Sliding-window estimation of non-stationary transition kernels.
//
// Rows declared stationary are estimated from all past episodes, rows
// declared drifting only from the last `window` episodes. Each row gets an
// L1 confidence radius, and the optimistic kernel is the member of the
// resulting ball that maximizes the value function.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <utility>
#include <vector>

#include "rmab/mdp.hpp"
#include "rmab/prior.hpp"

namespace rmab {

/// L1 diameter of the probability simplex.
inline constexpr double kMaxRadius = 2.0;

/// Transition counts C(s',a,s) of one arm.
///
/// Drifting rows are kept per episode in a ring of depth `window`; all other
/// rows accumulate into one all-history table. Queries at episode t see
/// drifting-row counts from episodes t-w..t-1 and every other transition
/// recorded so far, so a ball for episode t is built before its first
/// transition is recorded.
class WindowedCounts {
public:
    using Table = std::vector<std::uint64_t>;  // [s][a][s']

    WindowedCounts(PriorKnowledge prior, std::size_t window) : prior_(std::move(prior)), window_(window) {
        detail::require(window >= 1, "window must be at least one episode");
        const auto n = prior_.num_states();
        cumulative_.assign(n * 2 * n, 0);
    }

    const PriorKnowledge& prior() const noexcept { return prior_; }
    std::size_t window() const noexcept { return window_; }
    std::size_t num_states() const noexcept { return prior_.num_states(); }

    /// Episode currently being recorded (1-based).
    std::size_t episode() const noexcept { return episode_; }

    /// Starts recording episode `t`; episodes must not go backwards.
    void begin_episode(std::size_t t) {
        detail::require(t >= 1 && t >= episode_, "episodes must be recorded in order");
        episode_ = t;
    }

    /// Routes one observed transition by the row's class.
    void record(State s, Action a, State next) {
        const auto n = num_states();
        detail::require(s < n && next < n, "state out of range");
        detail::check_action(a);
        if (prior_.structural_zero(s, a, next)) {
            throw PriorViolation("observed transition " + std::to_string(s) + " -(" + std::to_string(a) + ")-> "
                                 + std::to_string(next) + " declared structurally impossible");
        }
        if (prior_.row_class(s, a) == RowClass::NonStationary) {
            ++current_table()[index(s, a, next)];
        } else {
            ++cumulative_[index(s, a, next)];
        }
    }

    /// Count of s -(a)-> s' recorded during episode `t`, if that episode is still retained.
    std::uint64_t episode_count(std::size_t t, State s, Action a, State next) const {
        for (const auto& [ep, table] : ring_) {
            if (ep == t) return table[index(s, a, next)];
        }
        return 0;
    }

    /// All-history count (non-drifting rows).
    std::uint64_t cumulative_count(State s, Action a, State next) const { return cumulative_[index(s, a, next)]; }

    /// C(s',a,s) as used for the ball at episode t.
    std::uint64_t count(std::size_t t, State s, Action a, State next) const {
        if (prior_.row_class(s, a) != RowClass::NonStationary) return cumulative_[index(s, a, next)];
        std::uint64_t total = 0;
        for (const auto& [ep, table] : ring_) {
            if (ep + window_ >= t && ep < t) total += table[index(s, a, next)];
        }
        return total;
    }

    std::vector<std::uint64_t> row_counts(std::size_t t, State s, Action a) const {
        std::vector<std::uint64_t> row(num_states());
        for (State j = 0; j < num_states(); ++j) row[j] = count(t, s, a, j);
        return row;
    }

    /// sum_{s'} C(s',a,s) before the max{., 1} floor.
    std::uint64_t row_total(std::size_t t, State s, Action a) const {
        const auto row = row_counts(t, s, a);
        return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
    }

    std::size_t retained_episodes() const noexcept { return ring_.size(); }

private:
    std::size_t index(State s, Action a, State next) const {
        return (s * 2 + static_cast<std::size_t>(a)) * num_states() + next;
    }

    Table& current_table() {
        detail::require(episode_ >= 1, "begin_episode must be called before recording");
        if (ring_.empty() || ring_.back().first != episode_) {
            ring_.emplace_back(episode_, Table(num_states() * 2 * num_states(), 0));
            while (ring_.size() > window_) ring_.pop_front();
        }
        return ring_.back().second;
    }

    PriorKnowledge prior_;
    std::size_t window_;
    std::size_t episode_ = 0;
    std::deque<std::pair<std::size_t, Table>> ring_;
    Table cumulative_;
};

/// Per-arm row estimates: P_hat(s'|s,a) = C(s',a,s) / max{C(s,a), 1}.
///
/// Known rows return their declared distribution; rows without observations
/// return the uniform distribution over next states outside S0(s,a).
using KernelRows = std::vector<std::array<std::vector<double>, 2>>;

inline std::vector<double> empirical_row(const WindowedCounts& counts, std::size_t t, State s, Action a) {
    const auto& prior = counts.prior();
    const auto n = prior.num_states();
    if (prior.row_class(s, a) == RowClass::Known) return prior.known_row(s, a);
    const auto c = counts.row_counts(t, s, a);
    const auto total = std::accumulate(c.begin(), c.end(), std::uint64_t{0});
    std::vector<double> row(n, 0.0);
    if (total == 0) {
        const double u = 1.0 / static_cast<double>(prior.allowed_count(s, a));
        for (State j = 0; j < n; ++j) row[j] = prior.structural_zero(s, a, j) ? 0.0 : u;
    } else {
        for (State j = 0; j < n; ++j) row[j] = static_cast<double>(c[j]) / static_cast<double>(total);
    }
    return row;
}

inline KernelRows empirical_kernel(const WindowedCounts& counts, std::size_t t) {
    detail::require(t >= 1, "episode index is 1-based");
    KernelRows rows(counts.num_states());
    for (State s = 0; s < counts.num_states(); ++s) {
        for (Action a = 0; a < 2; ++a) rows[s][static_cast<std::size_t>(a)] = empirical_row(counts, t, s, a);
    }
    return rows;
}

/// Inputs of the confidence radii shared by every row of one arm.
struct RadiusParams {
    std::size_t num_arms = 1;   // N
    std::size_t episodes = 1;   // T
    double eta1 = 0.05;
    double eta2 = 0.05;
};

/// sqrt(2|S| ln(2|Z|NT/eta) / C), the concentration term of both radii.
inline double concentration_radius(std::size_t num_states, std::size_t z_size, std::size_t num_arms,
                                   std::size_t episodes, double eta, std::uint64_t c) {
    const double denom = static_cast<double>(std::max<std::uint64_t>(c, 1));
    const double log_term = std::log(2.0 * static_cast<double>(z_size) * static_cast<double>(num_arms)
                                     * static_cast<double>(episodes) / eta);
    return std::sqrt(2.0 * static_cast<double>(num_states) * std::max(log_term, 0.0) / denom);
}

/// L1 radius of row (s,a) at episode t, clipped to the simplex diameter.
///
/// Stationary rows: sqrt(2|S| ln(2|Z1|NT/eta1) / C_all).
/// Drifting rows:   sqrt(2|S| ln(2|Z2|NT/eta2) / C_window) + w * epsilon.
inline double confidence_radius(const WindowedCounts& counts, std::size_t t, State s, Action a,
                                const RadiusParams& params) {
    detail::require(params.eta1 > 0.0 && params.eta2 > 0.0, "confidence levels must be positive");
    detail::require(params.episodes >= 1 && params.num_arms >= 1, "T and N must be positive");
    const auto& prior = counts.prior();
    const auto n = prior.num_states();
    switch (prior.row_class(s, a)) {
        case RowClass::Known:
            return 0.0;
        case RowClass::Stationary:
            return std::min(kMaxRadius, concentration_radius(n, prior.z1_size(), params.num_arms, params.episodes,
                                                             params.eta1, counts.row_total(t, s, a)));
        case RowClass::NonStationary:
            return std::min(kMaxRadius,
                            concentration_radius(n, prior.z2_size(), params.num_arms, params.episodes, params.eta2,
                                                 counts.row_total(t, s, a))
                                + static_cast<double>(counts.window()) * prior.epsilon());
    }
    return kMaxRadius;
}

/// Feasible kernel set of one arm: per row, the simplex intersected with
/// {p : |p - center|_1 <= radius, p(s') = 0 for s' in S0(s,a)}.
class ConfidenceBall {
public:
    struct Row {
        std::vector<double> center;
        double radius = 0.0;
        std::vector<bool> allowed;
        std::uint64_t count = 1;  // max{C(s,a), 1}
    };

    explicit ConfidenceBall(std::vector<std::array<Row, 2>> rows) : rows_(std::move(rows)) {
        detail::require(!rows_.empty(), "ball needs at least one state");
        const auto n = rows_.size();
        for (const auto& pair : rows_) {
            for (const auto& r : pair) {
                detail::require(r.center.size() == n && r.allowed.size() == n, "ball row has wrong length");
                detail::require(r.radius >= 0.0, "radius must be nonnegative");
                double sum = 0.0;
                for (State j = 0; j < n; ++j) {
                    detail::require(r.allowed[j] || r.center[j] == 0.0, "ball center violates a structural zero");
                    sum += r.center[j];
                }
                detail::require(std::abs(sum - 1.0) <= kStochasticTolerance, "ball center is not a distribution");
            }
        }
    }

    std::size_t num_states() const noexcept { return rows_.size(); }
    const Row& row(State s, Action a) const { return rows_[s][static_cast<std::size_t>(a)]; }

    TransitionKernel center_kernel() const {
        std::vector<std::array<std::vector<double>, 2>> rows(num_states());
        for (State s = 0; s < num_states(); ++s) {
            for (Action a = 0; a < 2; ++a) rows[s][static_cast<std::size_t>(a)] = row(s, a).center;
        }
        return TransitionKernel::from_rows(rows);
    }

    /// Membership of a full kernel, with slack `tol` on each L1 constraint.
    bool contains(const TransitionKernel& kernel, double tol = 1e-12) const {
        if (kernel.num_states() != num_states()) return false;
        for (State s = 0; s < num_states(); ++s) {
            for (Action a = 0; a < 2; ++a) {
                if (!row_contains(s, a, kernel.row(s, a), tol)) return false;
            }
        }
        return true;
    }

    bool row_contains(State s, Action a, std::span<const double> p, double tol = 1e-12) const {
        const auto& r = row(s, a);
        double l1 = 0.0;
        for (State j = 0; j < num_states(); ++j) {
            if (!r.allowed[j] && p[j] > tol) return false;
            l1 += std::abs(p[j] - r.center[j]);
        }
        return l1 <= r.radius + tol;
    }

private:
    std::vector<std::array<Row, 2>> rows_;
};

inline ConfidenceBall build_ball(const WindowedCounts& counts, std::size_t t, const RadiusParams& params) {
    const auto& prior = counts.prior();
    const auto n = prior.num_states();
    std::vector<std::array<ConfidenceBall::Row, 2>> rows(n);
    for (State s = 0; s < n; ++s) {
        for (Action a = 0; a < 2; ++a) {
            auto& r = rows[s][static_cast<std::size_t>(a)];
            r.center = empirical_row(counts, t, s, a);
            r.radius = confidence_radius(counts, t, s, a, params);
            r.allowed.resize(n);
            for (State j = 0; j < n; ++j) r.allowed[j] = !prior.structural_zero(s, a, j);
            r.count = std::max<std::uint64_t>(counts.row_total(t, s, a), 1);
        }
    }
    return ConfidenceBall(std::move(rows));
}

/// Maximizes sum_j p(j) v(j) over one ball row, given the allowed next
/// states ranked from most to least valuable: moves radius/2 of mass onto the
/// top state (capped at 1) and takes it from the bottom of the ranking.
inline std::vector<double> optimistic_row(const ConfidenceBall::Row& row, std::span<const State> ranking) {
    std::vector<double> p = row.center;
    State top = ranking.size();
    for (State j : ranking) {
        if (row.allowed[j]) {
            top = j;
            break;
        }
    }
    if (top == ranking.size()) return p;
    const double moved = std::min(row.radius / 2.0, 1.0 - p[top]);
    if (moved <= 0.0) return p;
    double remaining = moved;
    for (auto it = ranking.rbegin(); it != ranking.rend() && remaining > 0.0; ++it) {
        const State j = *it;
        if (j == top || !row.allowed[j]) continue;
        const double take = std::min(p[j], remaining);
        p[j] -= take;
        remaining -= take;
    }
    p[top] += moved - remaining;
    return p;
}

struct OptimisticSolution {
    TransitionKernel kernel;
    ValueFunctions values;
};

namespace detail {
inline std::vector<State> rank_by_value(std::span<const double> v) {
    std::vector<State> order(v.size());
    std::iota(order.begin(), order.end(), State{0});
    std::stable_sort(order.begin(), order.end(), [&](State x, State y) { return v[x] > v[y]; });
    return order;
}

inline TransitionKernel kernel_for_ranking(const ConfidenceBall& ball, std::span<const State> ranking) {
    std::vector<std::array<std::vector<double>, 2>> rows(ball.num_states());
    for (State s = 0; s < ball.num_states(); ++s) {
        for (Action a = 0; a < 2; ++a) rows[s][static_cast<std::size_t>(a)] = optimistic_row(ball.row(s, a), ranking);
    }
    return TransitionKernel::from_rows(rows);
}
}  // namespace detail

/// Extended value iteration: every backup also picks, row by row, the kernel
/// in the ball that maximizes the expected next value. Returns that kernel
/// and its own value fixpoint.
inline OptimisticSolution optimistic_kernel(const ConfidenceBall& ball, const RewardTable& rewards, double lambda,
                                            double gamma, const ValueIterationOptions& options = {}) {
    detail::require(ball.num_states() == rewards.num_states(), "ball and reward table disagree on |S|");
    detail::check_gamma(gamma);
    const auto n = ball.num_states();
    std::vector<double> v(n, 0.0), next(n, 0.0);
    if (!options.warm_start.empty()) v.assign(options.warm_start.begin(), options.warm_start.end());
    const double threshold = stopping_threshold(options.tol, gamma);
    double last = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const auto ranking = detail::rank_by_value(v);
        double residual = 0.0;
        for (State s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (Action a = 0; a < 2; ++a) {
                const auto p = optimistic_row(ball.row(s, a), ranking);
                double ev = 0.0;
                for (State j = 0; j < n; ++j) ev += p[j] * v[j];
                best = std::max(best, rewards(s, a) - lambda * a + gamma * ev);
            }
            next[s] = best;
            residual = std::max(residual, std::abs(best - v[s]));
        }
        if (residual > gamma * last + 1e-12 * (1.0 + last)) {
            throw std::logic_error("extended value iteration violated the contraction bound");
        }
        last = residual;
        v.swap(next);
        if (residual <= threshold) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergence(options.max_iterations, last);

    auto kernel = detail::kernel_for_ranking(ball, detail::rank_by_value(v));
    auto vi = options;
    vi.warm_start = v;
    auto values = value_iteration(kernel, rewards, lambda, gamma, vi);
    return {std::move(kernel), std::move(values)};
}

/// Closed-form optimistic kernel for arms whose value is monotone in the
/// state index: the ranking of next states is known in advance, so one
/// transport step per row replaces extended value iteration.
inline OptimisticSolution monotone_optimistic_kernel(const ConfidenceBall& ball, const RewardTable& rewards,
                                                     double lambda, double gamma, Monotonicity order,
                                                     const ValueIterationOptions& options = {}) {
    detail::require(order != Monotonicity::None, "closed-form optimism needs a monotone value function");
    detail::require(ball.num_states() == rewards.num_states(), "ball and reward table disagree on |S|");
    std::vector<State> ranking(ball.num_states());
    std::iota(ranking.begin(), ranking.end(), State{0});
    if (order == Monotonicity::Increasing) std::reverse(ranking.begin(), ranking.end());
    auto kernel = detail::kernel_for_ranking(ball, ranking);
    auto values = value_iteration(kernel, rewards, lambda, gamma, options);
    return {std::move(kernel), std::move(values)};
}

/// Window w = round(T^q), q = min{2k/3, 1}, for drift bound epsilon = T^-k.
inline std::size_t select_window(std::size_t episodes, double k) {
    detail::require(episodes >= 1, "T must be positive");
    detail::require(k > 0.0, "drift exponent k must be positive; stationary arms need no window");
    const double q = std::min(2.0 * k / 3.0, 1.0);
    const double w = std::round(std::pow(static_cast<double>(episodes), q));
    return static_cast<std::size_t>(std::clamp(w, 1.0, static_cast<double>(episodes)));
}

}  // namespace rmab
