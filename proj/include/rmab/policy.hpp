#pragma once

// Common contract for restless-bandit policies and the episode loop that
// drives them against ground-truth kernels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rmab/environments.hpp"
#include "rmab/mdp.hpp"
#include "rmab/random.hpp"

namespace rmab {

class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;

    /// Called before slot 1 of every episode (1-based).
    virtual void begin_episode(std::size_t /*episode*/) {}

    /// Arms to activate in this slot given every arm's current state; at most M.
    virtual std::vector<std::size_t> select(std::span<const State> states, std::size_t episode,
                                            std::size_t slot) = 0;

    virtual void observe(std::size_t /*arm*/, State /*s*/, Action /*a*/, double /*reward*/, State /*next*/) {}

    virtual void end_episode() {}

    /// Priority the policy assigned to `arm` in `state` this episode, NaN if none.
    virtual double priority(std::size_t /*arm*/, State /*state*/) const {
        return std::numeric_limits<double>::quiet_NaN();
    }
};

/// The `budget` arms with the highest scores; ties go to the lower arm id.
inline std::vector<std::size_t> top_arms(std::span<const double> scores, std::size_t budget) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    budget = std::min(budget, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget), order.end(),
                      [&](std::size_t x, std::size_t y) { return scores[x] > scores[y] || (scores[x] == scores[y] && x < y); });
    order.resize(budget);
    std::sort(order.begin(), order.end());
    return order;
}

/// States, actions, rewards and priorities of one episode, indexed [slot][arm].
struct EpisodeTrace {
    std::size_t episode = 0;
    std::vector<std::vector<State>> states;
    std::vector<std::vector<Action>> actions;
    std::vector<std::vector<double>> rewards;
    std::vector<std::vector<double>> priorities;
    double discounted_reward = 0.0;

    std::size_t horizon() const noexcept { return states.size(); }
};

/// Seeds of the ground-truth transition draws.
///
/// Draws depend on (run, arm, episode) only, so two policies that choose the
/// same actions see the same trajectory, and adding a policy never changes
/// another policy's draws.
struct TransitionStreams {
    std::uint64_t base_seed = 0;
    std::uint64_t run = 0;

    RandomStream for_arm(std::size_t arm, std::size_t episode) const {
        return RandomStream(base_seed, {0x7472616eULL, run, arm, episode});
    }
};

struct EpisodeSettings {
    std::size_t horizon = 1;  // H
    std::size_t budget = 1;   // M
    double gamma = 0.99;
};

/// Runs one episode of `policy` on the true kernels of `truth` at episode t.
///
/// Every arm consumes exactly one uniform per slot, inverted through the row
/// of the action it received.
inline EpisodeTrace simulate_episode(Policy& policy, const EnvironmentTruth& truth, std::size_t episode,
                                     const EpisodeSettings& settings, const TransitionStreams& streams) {
    const std::size_t n = truth.num_arms();
    detail::require(episode >= 1 && episode <= truth.episodes, "episode out of range");
    detail::require(settings.horizon >= 1, "horizon must be positive");
    detail::check_gamma(settings.gamma);

    std::vector<RandomStream> rngs;
    rngs.reserve(n);
    std::vector<State> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        rngs.push_back(streams.for_arm(i, episode));
        states[i] = truth.arms[i].initial_state;
    }

    EpisodeTrace trace;
    trace.episode = episode;
    policy.begin_episode(episode);
    double discount = 1.0;
    std::vector<Action> actions(n);
    std::vector<double> rewards(n), priorities(n);
    for (std::size_t h = 1; h <= settings.horizon; ++h) {
        const auto chosen = policy.select(states, episode, h);
        if (chosen.size() > settings.budget) {
            throw std::logic_error(policy.name() + " activated more than M arms");
        }
        std::fill(actions.begin(), actions.end(), 0);
        for (std::size_t arm : chosen) {
            if (arm >= n || actions[arm] == 1) throw std::logic_error(policy.name() + " returned an invalid arm set");
            actions[arm] = 1;
        }
        double slot_reward = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rewards[i] = truth.arms[i].rewards(states[i], actions[i]);
            priorities[i] = policy.priority(i, states[i]);
            slot_reward += rewards[i];
        }
        trace.states.push_back(states);
        trace.actions.push_back(actions);
        trace.rewards.push_back(rewards);
        trace.priorities.push_back(priorities);
        trace.discounted_reward += discount * slot_reward;
        discount *= settings.gamma;

        for (std::size_t i = 0; i < n; ++i) {
            const auto& kernel = truth.arms[i].kernel(episode);
            const State next = RandomStream::categorical(kernel.row(states[i], actions[i]), rngs[i].uniform());
            policy.observe(i, states[i], actions[i], rewards[i], next);
            states[i] = next;
        }
    }
    policy.end_episode();
    return trace;
}

}  // namespace rmab
