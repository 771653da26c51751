// rmab_acceptance: prints one PASS/FAIL line per acceptance criterion.
//
// Exits 0 once every check has run; pass --strict to exit 1 if any check fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "rmab/config.hpp"
#include "rmab/harness.hpp"

using namespace rmab;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

ExperimentConfig preset(const std::string& name) {
    auto c = load_config(std::filesystem::path(RMAB_PRESET_DIR) / (name + ".json"));
    c.workers = workers();
    return c;
}

std::string regrets(const ExperimentResult& r) {
    std::string out;
    for (const auto& p : r.config.policies) {
        const auto [mean, sd] = r.final_regret(p);
        out += (out.empty() ? "" : ", ") + p + " " + fmt(mean) + " (sd " + fmt(sd, 3) + ")";
    }
    return out;
}

Verdict table_one_dim() {
    const auto r = run_experiment(preset("one_dim_n10_m1"));
    const double ours = r.final_regret("ours").first, uc = r.final_regret("ucwhittle").first,
                 rnd = r.final_regret("random").first;
    return {ours < 0.25 * uc && ours < 0.1 * rnd,
            regrets(r) + "; ours/ucwhittle " + fmt(ours / uc, 3) + ", ours/random " + fmt(ours / rnd, 3)};
}

Verdict table_aoi() {
    const auto r = run_experiment(preset("aoi_n10_m1"));
    const double ours = r.final_regret("ours").first, uc = r.final_regret("ucwhittle").first,
                 rnd = r.final_regret("random").first;
    return {ours < 0.5 * uc && uc < rnd, regrets(r) + "; ours/ucwhittle " + fmt(ours / uc, 3)};
}

// Two three-state arms whose passive and active move probabilities both drift.
Verdict coverage() {
    const std::size_t episodes = 500, arms = 2;
    const double step = 0.01;
    EnvironmentTruth truth;
    truth.episodes = episodes;
    RandomStream rng(31, {0x636f76ULL});
    for (std::size_t n = 0; n < arms; ++n) {
        DriftProcess p{step, 0.7, 0.0, 1.0, 0.3 + 0.3 * static_cast<double>(n)};
        DriftProcess q{step, 0.3, 0.0, 1.0, 0.6};
        auto seq = std::make_shared<std::vector<TransitionKernel>>();
        for (std::size_t t = 1; t <= episodes; ++t) {
            seq->push_back(one_dim_kernel(3, p.current, q.current));
            p = advance_drift(p, rng);
            q = advance_drift(q, rng);
        }
        PriorKnowledge prior(3, 2.0 * step);
        for (State s = 0; s < 3; ++s) {
            prior.restrict_support(s, 0, {s == 0 ? 0 : s - 1, s});
            prior.restrict_support(s, 1, {s, std::min<State>(s + 1, 2)});
        }
        truth.arms.push_back({one_dim_rewards(3), seq, prior, 1, n, Monotonicity::Increasing, false});
    }
    truth.check_invariants();

    const double k = -std::log(step) / std::log(static_cast<double>(episodes));
    const std::size_t window = select_window(episodes, k);
    LearnerConfig lc;
    lc.gamma = 0.9;
    lc.radius = {arms, episodes, 0.05, 0.05};
    SlidingWindowWhittle learner(learner_arms(truth, std::vector<std::size_t>(arms, window)), lc);
    const EpisodeSettings settings{20, 1, 0.9};
    std::size_t covered = 0;
    for (std::size_t t = 1; t <= episodes; ++t) {
        simulate_episode(learner, truth, t, settings, {31, 0});
        for (std::size_t n = 0; n < arms; ++n) covered += learner.ball(n).contains(truth.arms[n].kernel(t)) ? 1 : 0;
    }
    const double frac = static_cast<double>(covered) / static_cast<double>(arms * episodes);
    return {frac >= 0.87, "covered " + std::to_string(covered) + "/" + std::to_string(arms * episodes) + " = " +
                              fmt(frac, 4) + " (window " + std::to_string(window) + ", threshold 0.87)"};
}

ConfidenceBall::Row full_row(std::vector<double> center, double radius) {
    ConfidenceBall::Row r;
    r.allowed.assign(center.size(), true);
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

Verdict optimism() {
    RandomStream rng(4242);
    double worst = 1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const auto truth = oracle::random_kernel(3, rng, 0.2);
        const auto center = oracle::random_kernel(3, rng, 0.0);
        std::vector<std::array<ConfidenceBall::Row, 2>> rows(3);
        for (State s = 0; s < 3; ++s) {
            for (Action a = 0; a < 2; ++a) {
                double l1 = 0.0;
                std::vector<double> c(3);
                for (State j = 0; j < 3; ++j) {
                    c[j] = center(s, a, j);
                    l1 += std::abs(c[j] - truth(s, a, j));
                }
                rows[s][static_cast<std::size_t>(a)] = full_row(c, std::min(2.0, l1 + 0.1 * rng.uniform()));
            }
        }
        const ConfidenceBall ball(rows);
        if (!ball.contains(truth)) return {false, "construction error at trial " + std::to_string(trial)};
        const auto r = oracle::random_rewards(3, rng);
        const double lambda = rng.uniform(), gamma = 0.9;
        const auto opt = optimistic_kernel(ball, r, lambda, gamma);
        const auto v = value_iteration(truth, r, lambda, gamma);
        for (State s = 0; s < 3; ++s) worst = std::min(worst, opt.values.v[s] - v.v[s]);
    }
    return {worst >= -1e-6, "min over 100 instances and states of V_opt - V_true = " + fmt(worst)};
}

Verdict index_corpus() {
    const auto corpus = oracle::small_corpus();
    double worst = 0.0;
    std::size_t checked = 0;
    double tol = 0.0;
    for (const auto& c : corpus) {
        WhittleOptions o;
        const double m = default_lambda_max(c.rewards, c.gamma) + 1.0;
        o.lambda_lo = -m;
        o.lambda_max = m;
        tol = 2.0 * o.search_tol;
        for (State s = 0; s < c.kernel.num_states(); ++s) {
            const double w = whittle_index(c.kernel, c.rewards, c.gamma, s, o);
            const double ref = oracle::grid_index(c.kernel, c.rewards, c.gamma, s, o.lambda_lo, m, o.search_tol / 2.0);
            worst = std::max(worst, std::abs(w - ref));
            ++checked;
        }
    }
    return {worst <= tol, std::to_string(corpus.size()) + " instances, " + std::to_string(checked) +
                              " states, max |bisection - grid| = " + fmt(worst) + " (bound " + fmt(tol) + ")"};
}

Verdict aoi_closed_form() {
    const std::size_t k = 100;
    const auto rewards = aoi_rewards(k, 0.9);
    double worst = 0.0, worst_avg = 0.0;
    for (int qi = 1; qi <= 10; ++qi) {
        const double q = 0.1 * qi;
        const auto kernel = aoi_kernel(k, q);
        for (std::size_t age = 1; age <= 10; ++age) {
            const double w = whittle_index(kernel, rewards, 0.99, age - 1);
            worst = std::max(worst, std::abs(aoi_closed_form_index(q, 0.9, age, 0.99) - w) / std::abs(w));
            worst_avg = std::max(worst_avg, std::abs(aoi_closed_form_index(q, 0.9, age) - w) / std::abs(w));
        }
    }
    return {worst <= 0.02, "max relative gap " + fmt(worst, 3) + " over q in 0.1..1.0, ages 1..10, gamma 0.99" +
                               " (undiscounted form: " + fmt(worst_avg, 3) + ")"};
}

Verdict evi_grid() {
    RandomStream rng(777);
    double worst = -1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const auto center = oracle::random_kernel(3, rng, 0.15);
        std::vector<std::array<ConfidenceBall::Row, 2>> rows(3);
        std::vector<std::array<std::vector<std::vector<double>>, 2>> candidates(3);
        for (State s = 0; s < 3; ++s) {
            for (Action a = 0; a < 2; ++a) {
                auto c = center.row(s, a);
                auto row = full_row({c.begin(), c.end()}, 0.1 + 0.9 * rng.uniform());
                auto& cand = candidates[s][static_cast<std::size_t>(a)];
                for (auto& p : oracle::simplex_grid(row.allowed, 0.02)) {
                    double l1 = 0.0;
                    for (State j = 0; j < 3; ++j) l1 += std::abs(p[j] - row.center[j]);
                    if (l1 <= row.radius) cand.push_back(std::move(p));
                }
                cand.push_back(row.center);
                rows[s][static_cast<std::size_t>(a)] = std::move(row);
            }
        }
        const ConfidenceBall ball(rows);
        const auto r = oracle::random_rewards(3, rng);
        const double lambda = 0.5 * rng.uniform(), gamma = 0.9;
        const auto evi = optimistic_kernel(ball, r, lambda, gamma);
        const auto grid = oracle::best_value_over_rows(candidates, r, lambda, gamma);
        const double vmax = r.max() / (1.0 - gamma);
        for (State s = 0; s < 3; ++s) {
            if (evi.values.v[s] < grid[s] - 1e-6) return {false, "grid beats EVI at trial " + std::to_string(trial)};
            worst = std::max(worst, (evi.values.v[s] - grid[s]) / vmax);
        }
    }
    return {worst <= 0.02, "max (V_evi - V_grid) / V_max = " + fmt(worst, 3) + " over 20 instances"};
}

Verdict sublinearity() {
    auto drifting = preset("one_dim_n10_m1");
    drifting.episodes = 200;
    drifting.runs = 20;
    drifting.policies = {"ours"};
    auto still = drifting;
    still.environment.epsilon = 0.0;
    still.window = still.episodes;
    const double r1 = sublinearity_check(mean_curve(run_experiment(drifting), "ours"));
    const double r2 = sublinearity_check(mean_curve(run_experiment(still), "ours"));
    return {r1 < 0.95 && r2 >= 0.3 && r2 <= 0.8,
            "drifting (eps 0.05, window " + std::to_string(drifting.resolved_window()) + ") slope " + fmt(r1, 4) +
                " (need < 0.95); stationary slope " + fmt(r2, 4) + " (need 0.3..0.8)"};
}

Verdict unit_identities() {
    std::string failed;
    // Windowed counts against a recount from the transition log.
    {
        PriorKnowledge prior(3, 0.1);
        prior.set_row_class(1, 1, RowClass::Stationary);
        const std::size_t w = 4;
        WindowedCounts c(prior, w);
        std::vector<std::tuple<std::size_t, State, Action, State>> log;
        RandomStream rng(8);
        bool ok = true;
        for (std::size_t t = 1; t <= 30 && ok; ++t) {
            c.begin_episode(t);
            for (State s = 0; s < 3; ++s) {
                for (Action a = 0; a < 2; ++a) {
                    for (State j = 0; j < 3; ++j) {
                        std::uint64_t n = 0;
                        for (const auto& [ep, ls, la, lj] : log) {
                            const bool drifting = prior.row_class(ls, la) == RowClass::NonStationary;
                            if (ls == s && la == a && lj == j && (!drifting || (ep + w >= t && ep < t))) ++n;
                        }
                        ok = ok && c.count(t, s, a, j) == n;
                    }
                }
            }
            for (std::size_t i = rng.below(20); i > 0; --i) {
                const State s = rng.below(3), j = rng.below(3);
                const auto a = static_cast<Action>(rng.below(2));
                c.record(s, a, j);
                log.emplace_back(t, s, a, j);
            }
        }
        if (!ok) failed += " recount";
    }
    // Radius: |S|=2, |Z2|=2, N=1, T=10, eta2=0.1, C=100, w=5, eps=0.01.
    double radius = 0.0;
    {
        PriorKnowledge prior(2, 0.01);
        prior.set_row_class(1, 0, RowClass::Stationary);
        prior.set_row_class(1, 1, RowClass::Stationary);
        WindowedCounts c(prior, 5);
        c.begin_episode(1);
        for (int i = 0; i < 100; ++i) c.record(0, 0, static_cast<State>(i % 2));
        radius = confidence_radius(c, 2, 0, 0, RadiusParams{1, 10, 0.05, 0.1});
        if (radius != std::sqrt(4.0 * std::log(400.0) / 100.0) + 5 * 0.01) failed += " radius";
    }
    if (select_window(10000, 0.6) != 40) failed += " select_window";
    // Cost update on a recorded trace.
    {
        const auto truth = build_environment(EnvironmentSpec::one_dim(), 6, 4, 3);
        LearnerConfig lc;
        lc.budget = 3;
        lc.gamma = 0.95;
        lc.radius = {6, 4, 0.05, 0.05};
        lc.optimism = OptimismMethod::Monotone;
        SlidingWindowWhittle learner(learner_arms(truth, std::vector<std::size_t>(6, 2)), lc);
        for (std::size_t t = 1; t <= 4; ++t) {
            const auto trace = simulate_episode(learner, truth, t, {10, 3, 0.95}, {9, 0});
            auto last = trace.priorities.back();
            std::sort(last.begin(), last.end(), std::greater<>());
            if (learner.lambda() != last[2]) failed += " lambda@" + std::to_string(t);
        }
    }
    return {failed.empty(), failed.empty() ? "recount, radius " + fmt(radius, 10) +
                                                 ", select_window(10000, 0.6) = 40, cost update all exact"
                                           : "mismatch:" + failed};
}

Verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "rmab_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto config = dir / "config.json";
    std::ofstream(config) << R"({"environment": {"family": "one_dim"}, "N": 6, "M": 2, "H": 30, "T": 12,)"
                          << R"( "runs": 3, "seed": 77, "policies": ["ours", "ucwhittle", "wiql", "random"]})";
    for (const char* sub : {"a", "b"}) {
        const std::string cmd = std::string("\"") + RMAB_BENCH_PATH + "\" run \"" + config.string() + "\" --out \"" +
                                (dir / sub).string() + "\" > \"" + (dir / (std::string(sub) + ".log")).string() +
                                "\" 2>&1";
        if (std::system(cmd.c_str()) != 0) return {false, "rmab_bench run failed; see " + (dir / sub).string()};
    }
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    std::string detail;
    bool same = true;
    for (const char* f : {"summary.csv", "curves.csv"}) {
        const auto a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
        same = same && !a.empty() && a == b;
        detail += std::string(detail.empty() ? "" : ", ") + f + " " + std::to_string(a.size()) + " bytes " +
                  (a == b ? "identical" : "differ");
    }
    if (same) std::filesystem::remove_all(dir);
    return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    const std::vector<std::pair<std::string, std::function<Verdict()>>> checks{
        {"1 one-dim regret ordering (N=10, M=1, 50 runs)", table_one_dim},
        {"2 wireless regret ordering (N=10, M=1, 50 runs)", table_aoi},
        {"3 confidence ball coverage", coverage},
        {"4 optimism dominance", optimism},
        {"5a index vs lambda-grid oracle", index_corpus},
        {"5b index vs AoI closed form", aoi_closed_form},
        {"6 extended value iteration vs grid search", evi_grid},
        {"7 sublinear regret at T=200", sublinearity},
        {"8 window and ball identities", unit_identities},
        {"9 byte-identical reruns", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : checks) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS " : "FAIL ") << "criterion " << name << ": " << v.detail << " [" << fmt(secs, 3)
                  << "s]" << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return strict && failures > 0 ? 1 : 0;
}
