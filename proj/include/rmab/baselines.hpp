#pragma once

// Comparison policies: full-history optimism (UCWhittle-style), tabular
// Q-learning Whittle (WIQL-style) and uniform random activation.

#include <algorithm>
#include <array>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rmab/learner.hpp"
#include "rmab/policy.hpp"
#include "rmab/random.hpp"

namespace rmab {

/// Full-history ablation of the sliding-window learner: every estimated row
/// is treated as stationary, drift is ignored and no window is used.
/// Structural zeros and exactly known rows are kept.
inline std::unique_ptr<SlidingWindowWhittle> ucwhittle_policy(std::vector<LearnerArm> arms, LearnerConfig config,
                                                              std::size_t episodes) {
    for (auto& arm : arms) {
        for (State s = 0; s < arm.prior.num_states(); ++s) {
            for (Action a = 0; a < 2; ++a) {
                if (arm.prior.row_class(s, a) == RowClass::NonStationary) {
                    arm.prior.set_row_class(s, a, RowClass::Stationary);
                }
            }
        }
        arm.prior.set_epsilon(0.0);
        arm.window = std::max<std::size_t>(episodes, 1);
    }
    return std::make_unique<SlidingWindowWhittle>(std::move(arms), std::move(config), "ucwhittle");
}

/// Picks M of the N arms uniformly at random every slot.
class RandomPolicy : public Policy {
public:
    RandomPolicy(std::size_t num_arms, std::size_t budget, std::uint64_t seed)
        : num_arms_(num_arms), budget_(budget), rng_(seed) {
        detail::require(budget >= 1 && budget <= num_arms, "budget M must lie in [1, N]");
    }

    std::string name() const override { return "random"; }

    std::vector<std::size_t> select(std::span<const State>, std::size_t, std::size_t) override {
        return sample_subset(rng_, num_arms_, budget_);
    }

    /// Uniform m-subset of {0..n-1} by a partial Fisher-Yates shuffle, sorted.
    static std::vector<std::size_t> sample_subset(RandomStream& rng, std::size_t n, std::size_t m) {
        std::vector<std::size_t> arms(n);
        std::iota(arms.begin(), arms.end(), std::size_t{0});
        for (std::size_t i = 0; i < m; ++i) std::swap(arms[i], arms[i + rng.below(n - i)]);
        arms.resize(m);
        std::sort(arms.begin(), arms.end());
        return arms;
    }

private:
    std::size_t num_arms_;
    std::size_t budget_;
    RandomStream rng_;
};

struct WiqlConfig {
    std::size_t budget = 1;
    double gamma = 0.99;
    /// Exploration probability is explore_scale / (explore_scale + slots so far); N when unset.
    std::optional<double> explore_scale;
    double initial_q = 0.0;
};

/// Q-learning Whittle index: per-arm tabular Q-learning on the unpenalized
/// reward with step size 1/(1 + visits(s,a)); arms are ranked by
/// Q(s,1) - Q(s,0), with epsilon-greedy exploration decaying over slots.
class WiqlPolicy : public Policy {
public:
    WiqlPolicy(std::vector<std::size_t> num_states, WiqlConfig config, std::uint64_t seed)
        : config_(config), rng_(seed) {
        detail::require(config_.budget >= 1 && config_.budget <= num_states.size(), "budget M must lie in [1, N]");
        for (auto k : num_states) {
            q_.emplace_back(k, std::array<double, 2>{config_.initial_q, config_.initial_q});
            visits_.emplace_back(k, std::array<std::uint64_t, 2>{0, 0});
        }
    }

    std::string name() const override { return "wiql"; }

    std::vector<std::size_t> select(std::span<const State> states, std::size_t, std::size_t) override {
        const double n = static_cast<double>(q_.size());
        const double scale = config_.explore_scale.value_or(n);
        const double explore = scale / (scale + static_cast<double>(slots_));
        ++slots_;
        if (rng_.bernoulli(explore)) return RandomPolicy::sample_subset(rng_, q_.size(), config_.budget);
        scores_.resize(q_.size());
        for (std::size_t i = 0; i < q_.size(); ++i) scores_[i] = q_[i][states[i]][1] - q_[i][states[i]][0];
        return top_arms(scores_, config_.budget);
    }

    /// Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a)), alpha = 1/(1+visits).
    void observe(std::size_t arm, State s, Action a, double reward, State next) override {
        auto& qa = q_[arm];
        auto& n = visits_[arm][s][static_cast<std::size_t>(a)];
        const double alpha = 1.0 / (1.0 + static_cast<double>(n));
        ++n;
        const double target = reward + config_.gamma * std::max(qa[next][0], qa[next][1]);
        auto& cell = qa[s][static_cast<std::size_t>(a)];
        cell += alpha * (target - cell);
    }

    double priority(std::size_t arm, State state) const override { return q_[arm][state][1] - q_[arm][state][0]; }

    double q(std::size_t arm, State s, Action a) const { return q_[arm][s][static_cast<std::size_t>(a)]; }
    std::uint64_t visits(std::size_t arm, State s, Action a) const {
        return visits_[arm][s][static_cast<std::size_t>(a)];
    }

private:
    WiqlConfig config_;
    RandomStream rng_;
    std::vector<std::vector<std::array<double, 2>>> q_;
    std::vector<std::vector<std::array<std::uint64_t, 2>>> visits_;
    std::vector<double> scores_;
    std::uint64_t slots_ = 0;
};

}  // namespace rmab
