#pragma once

// Ground-truth non-stationary restless bandit environments: the
// one-dimensional machine-monitoring arm and the age-of-information
// wireless-scheduling arm, with their parameter drift processes.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "rmab/mdp.hpp"
#include "rmab/prior.hpp"
#include "rmab/random.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

/// Bounded random walk: +epsilon with probability up_prob, else -epsilon, clamped to [lo, hi].
struct DriftProcess {
    double epsilon = 0.0;
    double up_prob = 0.7;
    double lo = 0.0;
    double hi = 1.0;
    double current = 0.0;

    void validate() const {
        detail::require(lo <= hi, "drift bounds are inverted");
        detail::require(current >= lo && current <= hi, "drift value outside its bounds");
        detail::require(up_prob >= 0.0 && up_prob <= 1.0, "drift up probability must lie in [0,1]");
        detail::require(epsilon >= 0.0, "drift step must be nonnegative");
    }
};

inline DriftProcess advance_drift(DriftProcess proc, RandomStream& rng) {
    proc.validate();
    const bool up = rng.bernoulli(proc.up_prob);
    proc.current = up ? std::min(proc.current + proc.epsilon, proc.hi) : std::max(proc.current - proc.epsilon, proc.lo);
    return proc;
}

/// Active: up to min(s+1,K-1) w.p. q, else stay. Passive: down to max(s-1,0) w.p. p, else stay.
inline TransitionKernel one_dim_kernel(std::size_t k, double p, double q) {
    detail::require(k >= 2, "one-dimensional arm needs at least two states");
    detail::require(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0, "move probabilities must lie in [0,1]");
    std::vector<double> dense(k * 2 * k, 0.0);
    auto at = [&](State s, Action a, State next) -> double& { return dense[(s * 2 + a) * k + next]; };
    for (State s = 0; s < k; ++s) {
        at(s, 0, s == 0 ? 0 : s - 1) += p;
        at(s, 0, s) += 1.0 - p;
        at(s, 1, std::min(s + 1, k - 1)) += q;
        at(s, 1, s) += 1.0 - q;
    }
    return TransitionKernel(k, std::move(dense));
}

inline RewardTable one_dim_rewards(std::size_t k) {
    std::vector<double> r(k);
    for (State s = 0; s < k; ++s) r[s] = static_cast<double>(s);
    return RewardTable::state_only(r);
}

/// AoI chain over ages 1..K (state index = age - 1), capped at K.
/// Active: reset to age 1 w.p. q, else age+1. Passive: age+1.
inline TransitionKernel aoi_kernel(std::size_t k, double q) {
    detail::require(k >= 2, "AoI arm needs at least two ages");
    detail::require(q >= 0.0 && q <= 1.0, "success probability must lie in [0,1]");
    std::vector<double> dense(k * 2 * k, 0.0);
    auto at = [&](State s, Action a, State next) -> double& { return dense[(s * 2 + a) * k + next]; };
    for (State s = 0; s < k; ++s) {
        const State up = std::min(s + 1, k - 1);
        at(s, 0, up) = 1.0;
        at(s, 1, 0) += q;
        at(s, 1, up) += 1.0 - q;
    }
    return TransitionKernel(k, std::move(dense));
}

inline RewardTable aoi_rewards(std::size_t k, double sigma2) {
    std::vector<double> r(k);
    for (State s = 0; s < k; ++s) r[s] = aoi_reward(sigma2, s + 1);
    return RewardTable::state_only(r);
}

/// max over (s,a) of sum_{s'} |P(s'|s,a) - P'(s'|s,a)|.
inline double max_row_l1_distance(const TransitionKernel& x, const TransitionKernel& y) {
    detail::require(x.num_states() == y.num_states(), "kernels disagree on |S|");
    double worst = 0.0;
    for (State s = 0; s < x.num_states(); ++s) {
        for (Action a = 0; a < 2; ++a) {
            double d = 0.0;
            const auto rx = x.row(s, a), ry = y.row(s, a);
            for (State j = 0; j < x.num_states(); ++j) d += std::abs(rx[j] - ry[j]);
            worst = std::max(worst, d);
        }
    }
    return worst;
}

enum class Family { OneDim, Aoi };

inline std::string to_string(Family f) { return f == Family::OneDim ? "one_dim" : "aoi"; }

inline Family family_from_string(const std::string& name) {
    if (name == "one_dim") return Family::OneDim;
    if (name == "aoi") return Family::Aoi;
    throw InvalidArgument("unknown environment family '" + name + "'");
}

/// Parameters of an environment family.
struct EnvironmentSpec {
    Family family = Family::OneDim;
    std::size_t num_states = 10;  // K; AoI cap
    double mix = 0.5;             // fraction of drifting arms
    double epsilon = 0.05;        // per-episode parameter step
    double up_prob = 0.7;
    std::size_t initial_state = 0;

    // one-dimensional arms
    double drift_p_init = 0.5;  // drifting arms: p(1), q fixed but unknown
    double drift_q = 0.5;
    double known_p = 0.5;  // remaining arms: known to the learner
    double known_q = 1.0;

    // AoI arms
    double sigma2 = 0.9;
    double drift_q_init = 0.1;
    double stationary_q = 1.0;

    static EnvironmentSpec one_dim() { return {}; }

    static EnvironmentSpec aoi() {
        EnvironmentSpec spec;
        spec.family = Family::Aoi;
        spec.num_states = 50;
        return spec;
    }

    Monotonicity monotonicity() const {
        return family == Family::OneDim ? Monotonicity::Increasing : Monotonicity::Decreasing;
    }
};

/// Ground truth for one arm. Kernel sequences are shared between arms of the same class.
struct ArmTruth {
    RewardTable rewards;
    std::shared_ptr<const std::vector<TransitionKernel>> kernels;  // episode t at index t-1
    PriorKnowledge prior;
    State initial_state = 0;
    std::size_t class_id = 0;
    Monotonicity monotone = Monotonicity::None;
    bool aoi_structure = false;

    const TransitionKernel& kernel(std::size_t episode) const { return (*kernels)[episode - 1]; }
};

struct EnvironmentTruth {
    std::vector<ArmTruth> arms;
    std::size_t episodes = 0;

    std::size_t num_arms() const noexcept { return arms.size(); }

    /// Throws std::logic_error if a kernel leaves its declared structure or
    /// drifts faster than the arm's declared bound.
    void check_invariants() const {
        for (const auto& arm : arms) {
            const auto& seq = *arm.kernels;
            if (seq.size() != episodes) throw std::logic_error("kernel sequence length differs from T");
            for (std::size_t t = 0; t < seq.size(); ++t) {
                if (!arm.prior.consistent_with(seq[t])) {
                    throw std::logic_error("kernel violates the declared prior knowledge");
                }
                if (t > 0 && max_row_l1_distance(seq[t], seq[t - 1]) > arm.prior.epsilon() + 1e-12) {
                    throw std::logic_error("kernel drift exceeds the declared bound");
                }
            }
        }
    }

    /// Hash of every arm's kernel sequence, for shared-truth checks.
    std::uint64_t fingerprint() const {
        std::uint64_t h = splitmix64(episodes);
        for (const auto& arm : arms) {
            for (const auto& k : *arm.kernels) h = splitmix64(h ^ kernel_fingerprint(k));
        }
        return h;
    }
};

namespace detail {
inline std::vector<double> drift_path(DriftProcess proc, std::size_t episodes, RandomStream& rng) {
    std::vector<double> path;
    path.reserve(episodes);
    path.push_back(proc.current);
    for (std::size_t t = 1; t < episodes; ++t) {
        proc = advance_drift(proc, rng);
        path.push_back(proc.current);
    }
    return path;
}

inline void set_one_dim_support(PriorKnowledge& prior, std::size_t k) {
    for (State s = 0; s < k; ++s) {
        prior.restrict_support(s, 0, {s == 0 ? 0 : s - 1, s});
        prior.restrict_support(s, 1, {s, std::min(s + 1, k - 1)});
    }
}

inline void set_aoi_support(PriorKnowledge& prior, std::size_t k) {
    for (State s = 0; s < k; ++s) {
        const State up = std::min(s + 1, k - 1);
        prior.restrict_support(s, 0, {up});
        prior.restrict_support(s, 1, {0, up});
    }
}

inline void set_known_rows(PriorKnowledge& prior, const TransitionKernel& kernel, Action a) {
    for (State s = 0; s < kernel.num_states(); ++s) {
        const auto r = kernel.row(s, a);
        prior.set_known(s, a, std::vector<double>(r.begin(), r.end()));
    }
}
}  // namespace detail

/// Pre-samples every arm's kernel sequence for `episodes` episodes.
///
/// The first round(mix * N) arms drift; the rest are stationary. Arms of one
/// class share a kernel sequence. The learner's drift bound is the row-level
/// L1 bound 2 * epsilon, since a parameter step of epsilon moves two entries of
/// a row by epsilon each.
inline EnvironmentTruth build_environment(const EnvironmentSpec& spec, std::size_t num_arms, std::size_t episodes,
                                          std::uint64_t seed) {
    detail::require(num_arms >= 1, "need at least one arm");
    detail::require(episodes >= 1, "need at least one episode");
    detail::require(spec.mix >= 0.0 && spec.mix <= 1.0, "mix must lie in [0,1]");
    detail::require(spec.initial_state < spec.num_states, "initial state out of range");
    const std::size_t k = spec.num_states;
    const auto drifting = static_cast<std::size_t>(std::lround(spec.mix * static_cast<double>(num_arms)));

    RandomStream rng(seed, {0x656e76ULL});
    DriftProcess proc{spec.epsilon, spec.up_prob, 0.0, 1.0,
                      spec.family == Family::OneDim ? spec.drift_p_init : spec.drift_q_init};
    const auto path = detail::drift_path(proc, episodes, rng);
    const double row_epsilon = 2.0 * spec.epsilon;

    EnvironmentTruth truth;
    truth.episodes = episodes;
    std::shared_ptr<std::vector<TransitionKernel>> drift_seq, stationary_seq;
    drift_seq = std::make_shared<std::vector<TransitionKernel>>();
    stationary_seq = std::make_shared<std::vector<TransitionKernel>>();

    RewardTable rewards = spec.family == Family::OneDim ? one_dim_rewards(k) : aoi_rewards(k, spec.sigma2);
    PriorKnowledge drift_prior(k, row_epsilon), stationary_prior(k, 0.0);

    if (spec.family == Family::OneDim) {
        for (double p : path) drift_seq->push_back(one_dim_kernel(k, p, spec.drift_q));
        const auto fixed = one_dim_kernel(k, spec.known_p, spec.known_q);
        stationary_seq->assign(episodes, fixed);
        detail::set_one_dim_support(drift_prior, k);
        detail::set_one_dim_support(stationary_prior, k);
        for (State s = 0; s < k; ++s) {
            drift_prior.set_row_class(s, 0, RowClass::NonStationary);
            drift_prior.set_row_class(s, 1, RowClass::Stationary);
        }
        detail::set_known_rows(stationary_prior, fixed, 0);
        detail::set_known_rows(stationary_prior, fixed, 1);
    } else {
        for (double q : path) drift_seq->push_back(aoi_kernel(k, q));
        const auto fixed = aoi_kernel(k, spec.stationary_q);
        stationary_seq->assign(episodes, fixed);
        detail::set_aoi_support(drift_prior, k);
        detail::set_aoi_support(stationary_prior, k);
        // Passive AoI rows are fully determined by the age dynamics.
        detail::set_known_rows(drift_prior, fixed, 0);
        detail::set_known_rows(stationary_prior, fixed, 0);
        for (State s = 0; s < k; ++s) {
            drift_prior.set_row_class(s, 1, RowClass::NonStationary);
            stationary_prior.set_row_class(s, 1, RowClass::Stationary);
        }
    }
    drift_prior.validate();
    stationary_prior.validate();

    for (std::size_t n = 0; n < num_arms; ++n) {
        const bool drifts = n < drifting;
        truth.arms.push_back(ArmTruth{rewards, drifts ? drift_seq : stationary_seq,
                                      drifts ? drift_prior : stationary_prior, spec.initial_state,
                                      drifts ? 0u : 1u, spec.monotonicity(), spec.family == Family::Aoi});
    }
    truth.check_invariants();
    return truth;
}

}  // namespace rmab
