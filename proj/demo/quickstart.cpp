// Ten one-dimensional arms, half of them drifting: run the sliding-window
// learner next to the true-kernel oracle and print per-episode regret.

#include <cstdio>

#include "rmab/harness.hpp"

int main() {
    using namespace rmab;
    const std::size_t n = 10, episodes = 20;
    const auto truth = build_environment(EnvironmentSpec::one_dim(), n, episodes, 7);
    const EpisodeSettings settings{100, 1, 0.99};
    const TransitionStreams streams{7, 0};

    LearnerConfig config;
    config.budget = settings.budget;
    config.gamma = settings.gamma;
    config.radius = {n, episodes, 0.05, 0.05};
    config.optimism = OptimismMethod::Monotone;
    const std::vector<std::size_t> windows(n, select_window(episodes, 0.77));
    SlidingWindowWhittle learner(learner_arms(truth, windows), config);
    WhittleOracle oracle(truth, settings.budget, settings.gamma, IndexMethod::Bisection);

    double total = 0.0;
    for (std::size_t t = 1; t <= episodes; ++t) {
        const double best = simulate_episode(oracle, truth, t, settings, streams).discounted_reward;
        const double got = simulate_episode(learner, truth, t, settings, streams).discounted_reward;
        total += best - got;
        std::printf("episode %2zu  lambda %8.4f  regret %9.4f  cumulative %9.4f\n", t, learner.lambda(), best - got,
                    total);
    }
}
