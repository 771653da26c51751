#pragma once

// Sliding-window optimistic Whittle policy.
//
// Each episode the learner builds one confidence ball per arm from its
// windowed counts, picks the optimistic kernel in the ball at the current
// activation cost, computes the Whittle index of every state under that
// kernel, and activates the M arms whose current states have the highest
// indices. After the last slot the activation cost becomes the M-th highest
// index among the arms' slot-H states.

#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rmab/environments.hpp"
#include "rmab/learning.hpp"
#include "rmab/policy.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

enum class OptimismMethod {
    ExtendedValueIteration,
    Monotone,  ///< closed form; requires a monotone arm
};

enum class IndexMethod {
    Bisection,
    AoiClosedForm,  ///< threshold-policy closed form; requires an AoI-structured kernel
};

/// What the learner knows about one arm.
struct LearnerArm {
    RewardTable rewards;
    PriorKnowledge prior;
    Monotonicity monotone = Monotonicity::None;
    bool aoi_structure = false;
    std::size_t window = 1;
};

struct LearnerConfig {
    std::size_t budget = 1;  // M
    double gamma = 0.99;
    RadiusParams radius;
    OptimismMethod optimism = OptimismMethod::ExtendedValueIteration;
    IndexMethod index = IndexMethod::Bisection;
    WhittleOptions whittle;
    double initial_lambda = 0.0;
};

/// Per-episode index table computation shared by the learner and the oracle.
class IndexCache {
public:
    IndexCache(IndexMethod method, WhittleOptions options) : method_(method), options_(std::move(options)) {}

    const WhittleIndexTable& table(const TransitionKernel& kernel, const RewardTable& rewards, double gamma) {
        const auto key = splitmix64(kernel_fingerprint(kernel) ^ reward_fingerprint(rewards));
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        if (cache_.size() > 4096) cache_.clear();
        auto t = method_ == IndexMethod::AoiClosedForm ? aoi_index_table(kernel, rewards, gamma)
                                                       : whittle_index_table(kernel, rewards, gamma, options_);
        return cache_.emplace(key, std::move(t)).first->second;
    }

private:
    static std::uint64_t reward_fingerprint(const RewardTable& r) {
        std::uint64_t h = 0x72657761ULL;
        for (State s = 0; s < r.num_states(); ++s) {
            for (Action a = 0; a < 2; ++a) {
                double v = r(s, a);
                std::uint64_t bits = 0;
                std::memcpy(&bits, &v, sizeof bits);
                h = splitmix64(h ^ bits);
            }
        }
        return h;
    }

    IndexMethod method_;
    WhittleOptions options_;
    std::unordered_map<std::uint64_t, WhittleIndexTable> cache_;
};

class SlidingWindowWhittle : public Policy {
public:
    SlidingWindowWhittle(std::vector<LearnerArm> arms, LearnerConfig config, std::string name = "ours")
        : arms_(std::move(arms)), config_(std::move(config)), name_(std::move(name)),
          cache_(config_.index, config_.whittle), lambda_(config_.initial_lambda) {
        detail::require(!arms_.empty(), "learner needs at least one arm");
        detail::require(config_.budget >= 1 && config_.budget <= arms_.size(), "budget M must lie in [1, N]");
        detail::check_gamma(config_.gamma);
        for (const auto& arm : arms_) {
            arm.prior.validate();
            detail::require(arm.rewards.num_states() == arm.prior.num_states(), "prior and rewards disagree on |S|");
            detail::require(config_.optimism != OptimismMethod::Monotone || arm.monotone != Monotonicity::None,
                            "closed-form optimism requested for an arm that is not monotone");
            detail::require(config_.index != IndexMethod::AoiClosedForm || arm.aoi_structure,
                            "AoI index requested for an arm without AoI structure");
            counts_.emplace_back(arm.prior, arm.window);
        }
    }

    std::string name() const override { return name_; }

    void begin_episode(std::size_t episode) override {
        episode_ = episode;
        balls_.clear();
        optimistic_.clear();
        tables_.clear();
        for (std::size_t n = 0; n < arms_.size(); ++n) {
            counts_[n].begin_episode(episode);
            balls_.push_back(build_ball(counts_[n], episode, config_.radius));
            ValueIterationOptions vi = config_.whittle.vi;
            auto sol = config_.optimism == OptimismMethod::Monotone
                           ? monotone_optimistic_kernel(balls_.back(), arms_[n].rewards, lambda_, config_.gamma,
                                                        arms_[n].monotone, vi)
                           : optimistic_kernel(balls_.back(), arms_[n].rewards, lambda_, config_.gamma, vi);
            tables_.push_back(cache_.table(sol.kernel, arms_[n].rewards, config_.gamma));
            optimistic_.push_back(std::move(sol));
        }
    }

    std::vector<std::size_t> select(std::span<const State> states, std::size_t, std::size_t) override {
        last_scores_.resize(arms_.size());
        for (std::size_t n = 0; n < arms_.size(); ++n) last_scores_[n] = tables_[n](states[n]);
        return top_arms(last_scores_, config_.budget);
    }

    void observe(std::size_t arm, State s, Action a, double, State next) override { counts_[arm].record(s, a, next); }

    /// lambda^{(t+1)} = M-th highest index over the arms' states in the last slot.
    void end_episode() override {
        if (!last_scores_.empty()) lambda_ = mth_highest(last_scores_, config_.budget);
    }

    double priority(std::size_t arm, State state) const override { return tables_.at(arm)(state); }

    double lambda() const noexcept { return lambda_; }
    std::size_t episode() const noexcept { return episode_; }
    const LearnerConfig& config() const noexcept { return config_; }
    const WindowedCounts& counts(std::size_t arm) const { return counts_.at(arm); }
    const ConfidenceBall& ball(std::size_t arm) const { return balls_.at(arm); }
    const OptimisticSolution& optimistic(std::size_t arm) const { return optimistic_.at(arm); }
    const WhittleIndexTable& index_table(std::size_t arm) const { return tables_.at(arm); }

    static double mth_highest(std::vector<double> scores, std::size_t m) {
        detail::require(m >= 1 && m <= scores.size(), "M out of range");
        std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(m - 1), scores.end(),
                         std::greater<>());
        return scores[m - 1];
    }

private:
    std::vector<LearnerArm> arms_;
    LearnerConfig config_;
    std::string name_;
    IndexCache cache_;
    std::vector<WindowedCounts> counts_;
    std::vector<ConfidenceBall> balls_;
    std::vector<OptimisticSolution> optimistic_;
    std::vector<WhittleIndexTable> tables_;
    std::vector<double> last_scores_;
    double lambda_ = 0.0;
    std::size_t episode_ = 0;
};

/// One learner episode: H slots on the true kernels.
inline EpisodeTrace algorithm1_step(SlidingWindowWhittle& learner, const EnvironmentTruth& truth,
                                    std::size_t episode, const EpisodeSettings& settings,
                                    const TransitionStreams& streams) {
    return simulate_episode(learner, truth, episode, settings, streams);
}

/// Learner view of an environment: rewards, prior and structure, no kernels.
inline std::vector<LearnerArm> learner_arms(const EnvironmentTruth& truth, std::span<const std::size_t> windows) {
    detail::require(windows.size() == truth.num_arms(), "one window per arm required");
    std::vector<LearnerArm> arms;
    for (std::size_t n = 0; n < truth.num_arms(); ++n) {
        const auto& a = truth.arms[n];
        arms.push_back({a.rewards, a.prior, a.monotone, a.aoi_structure, windows[n]});
    }
    return arms;
}

/// Whittle index policy with access to the true kernels of each episode.
class WhittleOracle : public Policy {
public:
    WhittleOracle(const EnvironmentTruth& truth, std::size_t budget, double gamma, IndexMethod method,
                  WhittleOptions options = {})
        : truth_(truth), budget_(budget), gamma_(gamma), cache_(method, std::move(options)) {}

    std::string name() const override { return "oracle"; }

    void begin_episode(std::size_t episode) override {
        tables_.clear();
        for (const auto& arm : truth_.arms) tables_.push_back(cache_.table(arm.kernel(episode), arm.rewards, gamma_));
    }

    std::vector<std::size_t> select(std::span<const State> states, std::size_t, std::size_t) override {
        scores_.resize(states.size());
        for (std::size_t n = 0; n < states.size(); ++n) scores_[n] = tables_[n](states[n]);
        return top_arms(scores_, budget_);
    }

    double priority(std::size_t arm, State state) const override { return tables_.at(arm)(state); }

    const WhittleIndexTable& index_table(std::size_t arm) const { return tables_.at(arm); }

private:
    const EnvironmentTruth& truth_;
    std::size_t budget_;
    double gamma_;
    IndexCache cache_;
    std::vector<WhittleIndexTable> tables_;
    std::vector<double> scores_;
};

}  // namespace rmab
