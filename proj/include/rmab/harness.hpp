#pragma once

// Seeded multi-run regret experiments.
//
// Each run pre-samples one ground-truth environment. Every policy, and the
// Whittle oracle that knows the true kernels, plays T episodes on it with
// the same per-(run, arm, episode) transition streams; the per-episode
// regret is the oracle's discounted reward minus the policy's.

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rmab/baselines.hpp"
#include "rmab/environments.hpp"
#include "rmab/learner.hpp"
#include "rmab/policy.hpp"

namespace rmab {

inline const std::vector<std::string>& known_policies() {
    static const std::vector<std::string> names{"ours", "ucwhittle", "wiql", "random", "oracle"};
    return names;
}

struct ExperimentConfig {
    EnvironmentSpec environment;
    std::size_t num_arms = 10;  // N
    std::size_t budget = 1;     // M
    std::size_t horizon = 100;  // H
    std::size_t episodes = 50;  // T
    double gamma = 0.99;
    /// When set, the drift step is T^-k; otherwise k is implied by environment.epsilon.
    std::optional<double> drift_exponent;
    /// Explicit sliding window; select_window(T, k) when unset.
    std::optional<std::size_t> window;
    double eta1 = 0.05;
    double eta2 = 0.05;
    std::vector<std::string> policies{"ours", "ucwhittle", "wiql", "random"};
    std::size_t runs = 50;
    std::uint64_t seed = 1;
    std::string output = "results";
    std::size_t workers = 1;
    double search_tol = 1e-4;
    double vi_tol = 1e-8;
    std::string generator = kGeneratorName;

    void validate() const {
        detail::require(budget >= 1 && budget <= num_arms, "need 1 <= M <= N");
        detail::require(horizon >= 1 && episodes >= 1, "H and T must be positive");
        detail::check_gamma(gamma);
        detail::require(runs >= 1, "need at least one run");
        detail::require(workers >= 1, "need at least one worker");
        detail::require(eta1 > 0.0 && eta2 > 0.0, "confidence levels must be positive");
        detail::require(search_tol > 0.0 && vi_tol > 0.0, "tolerances must be positive");
        detail::require(!drift_exponent || *drift_exponent > 0.0, "drift exponent k must be positive");
        detail::require(!window || *window >= 1, "window must be positive");
        detail::require(environment.num_states >= 2, "arms need at least two states");
        detail::require(environment.initial_state < environment.num_states, "initial state out of range");
        detail::require(environment.epsilon >= 0.0 && environment.epsilon <= 1.0, "drift step must lie in [0,1]");
        detail::require(generator == kGeneratorName, "unsupported generator '" + generator + "'");
        detail::require(!policies.empty(), "no policies selected");
        for (const auto& p : policies) {
            detail::require(std::find(known_policies().begin(), known_policies().end(), p) != known_policies().end(),
                            "unknown policy '" + p + "'");
        }
    }

    /// Per-episode drift step of the drifting parameter.
    double drift_step() const {
        return drift_exponent ? std::pow(static_cast<double>(episodes), -*drift_exponent) : environment.epsilon;
    }

    EnvironmentSpec resolved_environment() const {
        auto spec = environment;
        spec.epsilon = drift_step();
        return spec;
    }

    /// Sliding window of the drifting rows.
    std::size_t resolved_window() const {
        if (window) return std::min(*window, episodes);
        const double eps = drift_step();
        if (eps <= 0.0 || episodes == 1) return episodes;
        const double k = drift_exponent ? *drift_exponent : -std::log(eps) / std::log(static_cast<double>(episodes));
        if (k <= 0.0) return 1;
        return select_window(episodes, k);
    }

    LearnerConfig learner_config() const {
        LearnerConfig lc;
        lc.budget = budget;
        lc.gamma = gamma;
        lc.radius = {num_arms, episodes, eta1, eta2};
        lc.optimism = OptimismMethod::Monotone;
        lc.index = environment.family == Family::Aoi ? IndexMethod::AoiClosedForm : IndexMethod::Bisection;
        lc.whittle.search_tol = search_tol;
        lc.whittle.vi.tol = vi_tol;
        return lc;
    }

    WhittleOptions whittle_options() const {
        WhittleOptions w;
        w.search_tol = search_tol;
        w.vi.tol = vi_tol;
        return w;
    }
};

/// One (run, policy, episode) row of regret accounting.
struct RegretRecord {
    std::size_t run = 0;
    std::string policy;
    std::size_t episode = 0;
    double oracle_reward = 0.0;
    double policy_reward = 0.0;
    double regret = 0.0;
    double cumulative_regret = 0.0;
};

struct CurvePoint {
    std::string policy;
    std::size_t episode = 0;
    double mean = 0.0;
    double std = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RegretRecord> records;  // ordered by (run, policy order, episode)
    std::vector<std::uint64_t> truth_fingerprints;  // one per run

    /// Mean and sample standard deviation of cumulative regret per (policy, episode).
    std::vector<CurvePoint> curves() const {
        std::vector<CurvePoint> out;
        for (const auto& policy : config.policies) {
            for (std::size_t t = 1; t <= config.episodes; ++t) {
                std::vector<double> xs;
                for (const auto& r : records) {
                    if (r.policy == policy && r.episode == t) xs.push_back(r.cumulative_regret);
                }
                if (xs.empty()) continue;
                double mean = 0.0;
                for (double x : xs) mean += x;
                mean /= static_cast<double>(xs.size());
                double var = 0.0;
                for (double x : xs) var += (x - mean) * (x - mean);
                const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
                out.push_back({policy, t, mean, sd});
            }
        }
        return out;
    }

    /// Mean and std of Reg(T) for `policy`.
    std::pair<double, double> final_regret(const std::string& policy) const {
        for (const auto& p : curves()) {
            if (p.policy == policy && p.episode == config.episodes) return {p.mean, p.std};
        }
        throw InvalidArgument("no results for policy '" + policy + "'");
    }
};

/// Module failure annotated with where it happened; carries the records of completed runs.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(const std::string& what, ExperimentResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const ExperimentResult& partial() const noexcept { return partial_; }

private:
    ExperimentResult partial_;
};

namespace detail {
inline std::uint64_t name_key(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

inline std::unique_ptr<Policy> make_policy(const std::string& name, const ExperimentConfig& config,
                                           const EnvironmentTruth& truth, std::size_t run) {
    const auto seed = derive_seed(config.seed, {0x706f6c6963ULL, name_key(name), run});
    const std::vector<std::size_t> windows(truth.num_arms(), config.resolved_window());
    if (name == "ours") {
        return std::make_unique<SlidingWindowWhittle>(learner_arms(truth, windows), config.learner_config(), "ours");
    }
    if (name == "ucwhittle") return ucwhittle_policy(learner_arms(truth, windows), config.learner_config(), config.episodes);
    if (name == "random") return std::make_unique<RandomPolicy>(truth.num_arms(), config.budget, seed);
    if (name == "wiql") {
        std::vector<std::size_t> sizes;
        for (const auto& a : truth.arms) sizes.push_back(a.rewards.num_states());
        WiqlConfig wc;
        wc.budget = config.budget;
        wc.gamma = config.gamma;
        return std::make_unique<WiqlPolicy>(sizes, wc, seed);
    }
    if (name == "oracle") {
        return std::make_unique<WhittleOracle>(truth, config.budget, config.gamma,
                                               config.learner_config().index, config.whittle_options());
    }
    throw InvalidArgument("unknown policy '" + name + "'");
}

struct RunOutput {
    std::vector<RegretRecord> records;
    std::uint64_t fingerprint = 0;
};

inline RunOutput run_single(const ExperimentConfig& config, std::size_t run) {
    const auto truth = build_environment(config.resolved_environment(), config.num_arms, config.episodes,
                                         config.seed + run);
    const EpisodeSettings settings{config.horizon, config.budget, config.gamma};
    const TransitionStreams streams{config.seed, run};

    std::vector<double> oracle(config.episodes);
    {
        WhittleOracle o(truth, config.budget, config.gamma, config.learner_config().index, config.whittle_options());
        for (std::size_t t = 1; t <= config.episodes; ++t) {
            try {
                oracle[t - 1] = simulate_episode(o, truth, t, settings, streams).discounted_reward;
            } catch (const std::exception& e) {
                throw std::runtime_error("run " + std::to_string(run) + ", policy oracle, episode "
                                         + std::to_string(t) + ": " + e.what());
            }
        }
    }

    RunOutput out;
    out.fingerprint = truth.fingerprint();
    for (const auto& name : config.policies) {
        auto policy = make_policy(name, config, truth, run);
        double cumulative = 0.0;
        for (std::size_t t = 1; t <= config.episodes; ++t) {
            double reward = 0.0;
            try {
                reward = simulate_episode(*policy, truth, t, settings, streams).discounted_reward;
            } catch (const std::exception& e) {
                throw std::runtime_error("run " + std::to_string(run) + ", policy " + name + ", episode "
                                         + std::to_string(t) + ": " + e.what());
            }
            const double regret = oracle[t - 1] - reward;
            cumulative += regret;
            out.records.push_back({run, name, t, oracle[t - 1], reward, regret, cumulative});
        }
    }
    return out;
}
}  // namespace detail

/// Runs every configured policy for `runs` independent seeded runs.
///
/// Runs execute on up to `workers` threads; results are assembled in run
/// order, so the output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::optional<detail::RunOutput>> outputs(config.runs);
    std::vector<std::string> errors(config.runs);
    std::mutex mutex;
    std::size_t next_run = 0;

    auto worker = [&] {
        for (;;) {
            std::size_t run;
            {
                std::lock_guard lock(mutex);
                if (next_run >= config.runs) return;
                run = next_run++;
            }
            try {
                outputs[run] = detail::run_single(config, run);
            } catch (const std::exception& e) {
                errors[run] = e.what();
                std::lock_guard lock(mutex);
                next_run = config.runs;  // stop handing out work
            }
        }
    };
    const std::size_t threads = std::min(config.workers, config.runs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentResult result;
    result.config = config;
    std::string failure;
    for (std::size_t run = 0; run < config.runs; ++run) {
        if (!errors[run].empty() && failure.empty()) failure = errors[run];
        if (!outputs[run]) continue;
        result.records.insert(result.records.end(), outputs[run]->records.begin(), outputs[run]->records.end());
        result.truth_fingerprints.push_back(outputs[run]->fingerprint);
    }
    if (!failure.empty()) throw ExperimentError(failure, std::move(result));
    return result;
}

namespace detail {
inline std::string format_float(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(6) << x;
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}
}  // namespace detail

/// summary.csv: policy,N,M,H,T,mean_regret,std
inline std::string summary_csv(const ExperimentResult& result) {
    const auto& c = result.config;
    std::string out = "policy,N,M,H,T,mean_regret,std\n";
    for (const auto& p : result.curves()) {
        if (p.episode != c.episodes) continue;
        out += p.policy + "," + std::to_string(c.num_arms) + "," + std::to_string(c.budget) + ","
               + std::to_string(c.horizon) + "," + std::to_string(c.episodes) + "," + detail::format_float(p.mean)
               + "," + detail::format_float(p.std) + "\n";
    }
    return out;
}

/// curves.csv: policy,episode,mean_cumulative_regret,std
inline std::string curves_csv(const ExperimentResult& result) {
    std::string out = "policy,episode,mean_cumulative_regret,std\n";
    for (const auto& p : result.curves()) {
        out += p.policy + "," + std::to_string(p.episode) + "," + detail::format_float(p.mean) + ","
               + detail::format_float(p.std) + "\n";
    }
    return out;
}

/// Writes summary.csv and curves.csv into `dir`, creating it if needed.
inline void emit_results(const ExperimentResult& result, const std::filesystem::path& dir) {
    detail::require(!result.records.empty(), "no records to emit");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    detail::write_file(dir / "summary.csv", summary_csv(result));
    detail::write_file(dir / "curves.csv", curves_csv(result));
}

/// Least-squares slope of log Reg(t) against log t over the second half of
/// the curve (curve[i] is Reg(i+1)). Nonpositive entries are skipped.
inline double sublinearity_check(std::span<const double> curve) {
    detail::require(curve.size() >= 10, "need at least 10 episodes to fit a regret exponent");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = curve.size() / 2; i < curve.size(); ++i) {
        if (curve[i] > 0.0 && std::isfinite(curve[i])) {
            pts.emplace_back(std::log(static_cast<double>(i + 1)), std::log(curve[i]));
        }
    }
    detail::require(pts.size() >= 5, "fewer than 5 positive points in the second half of the curve");
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

/// Mean cumulative regret curve of one policy.
inline std::vector<double> mean_curve(const ExperimentResult& result, const std::string& policy) {
    std::vector<double> curve;
    for (const auto& p : result.curves()) {
        if (p.policy == policy) curve.push_back(p.mean);
    }
    return curve;
}

/// Discounted reward of the true-kernel Whittle policy in episode t of `run`.
inline double oracle_episode_reward(const EnvironmentTruth& truth, std::size_t episode, const EpisodeSettings& settings,
                                    const TransitionStreams& streams, IndexMethod method,
                                    const WhittleOptions& options = {}) {
    WhittleOracle oracle(truth, settings.budget, settings.gamma, method, options);
    return simulate_episode(oracle, truth, episode, settings, streams).discounted_reward;
}

}  // namespace rmab
