#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmab/config.hpp"
#include "rmab/harness.hpp"

using namespace rmab;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.num_arms = 4;
    c.budget = 1;
    c.horizon = 10;
    c.episodes = 6;
    c.gamma = 0.95;
    c.runs = 3;
    c.seed = 5;
    c.policies = {"ours", "random"};
    return c;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rmab_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Experiment, OracleAgainstItselfHasZeroRegret) {
    auto c = small_config();
    c.policies = {"oracle"};
    c.runs = 2;
    for (const auto& r : run_experiment(c).records) {
        EXPECT_EQ(r.regret, 0.0);
        EXPECT_EQ(r.policy_reward, r.oracle_reward);
    }
}

TEST(Experiment, CumulativeRegretIsThePrefixSum) {
    const auto result = run_experiment(small_config());
    ASSERT_EQ(result.records.size(), 3u * 2u * 6u);
    double sum = 0.0;
    for (const auto& r : result.records) {
        if (r.episode == 1) sum = 0.0;
        sum += r.oracle_reward - r.policy_reward;
        EXPECT_EQ(r.regret, r.oracle_reward - r.policy_reward);
        EXPECT_NEAR(r.cumulative_regret, sum, 1e-9);
    }
}

TEST(Experiment, OracleRewardIsSharedAcrossPolicies) {
    const auto result = run_experiment(small_config());
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        for (std::size_t j = 0; j < result.records.size(); ++j) {
            const auto &a = result.records[i], &b = result.records[j];
            if (a.run == b.run && a.episode == b.episode) {
                EXPECT_EQ(a.oracle_reward, b.oracle_reward);
            }
        }
    }
    EXPECT_EQ(result.truth_fingerprints.size(), 3u);
    EXPECT_NE(result.truth_fingerprints[0], result.truth_fingerprints[1]);
}

TEST(Experiment, AddingAPolicyLeavesOthersUntouched) {
    auto c = small_config();
    c.policies = {"random"};
    const auto alone = run_experiment(c);
    c.policies = {"wiql", "ours", "random"};
    const auto together = run_experiment(c);
    EXPECT_EQ(alone.final_regret("random"), together.final_regret("random"));
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
    auto c = small_config();
    c.runs = 5;
    const auto serial = run_experiment(c);
    c.workers = 3;
    const auto parallel = run_experiment(c);
    EXPECT_EQ(summary_csv(serial), summary_csv(parallel));
    EXPECT_EQ(curves_csv(serial), curves_csv(parallel));
}

TEST(Experiment, MoreRunsShrinkTheStandardError) {
    auto c = small_config();
    c.policies = {"random"};
    c.runs = 20;
    const auto [m1, s1] = run_experiment(c).final_regret("random");
    c.runs = 40;
    const auto [m2, s2] = run_experiment(c).final_regret("random");
    const double ratio = (s1 / std::sqrt(20.0)) / (s2 / std::sqrt(40.0));
    EXPECT_GT(ratio, std::sqrt(2.0) * 0.7);
    EXPECT_LT(ratio, std::sqrt(2.0) * 1.3);
}

TEST(Experiment, CurvesAggregateMeanAndSampleStd) {
    const auto result = run_experiment(small_config());
    for (const auto& p : result.curves()) {
        std::vector<double> xs;
        for (const auto& r : result.records) {
            if (r.policy == p.policy && r.episode == p.episode) xs.push_back(r.cumulative_regret);
        }
        ASSERT_EQ(xs.size(), 3u);
        const double mean = (xs[0] + xs[1] + xs[2]) / 3.0;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        EXPECT_NEAR(p.mean, mean, 1e-9);
        EXPECT_NEAR(p.std, std::sqrt(ss / 2.0), 1e-9);
    }
}

TEST(Csv, ShapesAndHeaders) {
    auto c = small_config();
    c.policies = {"random"};
    c.episodes = 2;
    const auto result = run_experiment(c);
    const auto curves = lines(curves_csv(result));
    ASSERT_EQ(curves.size(), 3u);
    EXPECT_EQ(curves[0], "policy,episode,mean_cumulative_regret,std");
    EXPECT_EQ(curves[1].rfind("random,1,", 0), 0u);
    const auto summary = lines(summary_csv(result));
    ASSERT_EQ(summary.size(), 2u);
    EXPECT_EQ(summary[0], "policy,N,M,H,T,mean_regret,std");
    EXPECT_EQ(summary[1].rfind("random,4,1,10,2,", 0), 0u);
}

TEST(Csv, SummaryEqualsLastCurveRow) {
    const auto result = run_experiment(small_config());
    const auto curves = lines(curves_csv(result));
    for (const auto& row : lines(summary_csv(result))) {
        if (row.rfind("policy,", 0) == 0) continue;
        const auto policy = row.substr(0, row.find(','));
        const auto tail = row.substr(row.find(",6,") + 3);
        EXPECT_NE(std::find(curves.begin(), curves.end(), policy + ",6," + tail), curves.end()) << row;
    }
}

TEST(Csv, SixSignificantDigits) {
    EXPECT_EQ(detail::format_float(1234.56789), "1234.57");
    EXPECT_EQ(detail::format_float(0.000123456789), "0.000123457");
    EXPECT_EQ(detail::format_float(0.0), "0");
    EXPECT_EQ(detail::format_float(-2.5), "-2.5");
}

TEST(Csv, EmitWritesByteIdenticalFilesOnRerun) {
    const auto dir = scratch("emit");
    emit_results(run_experiment(small_config()), dir / "a");
    emit_results(run_experiment(small_config()), dir / "b");
    for (const char* f : {"summary.csv", "curves.csv"}) {
        const auto a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(dir / "b" / f));
    }
    const auto parsed = read_curves_csv(dir / "a" / "curves.csv");
    ASSERT_EQ(parsed.size(), 2u);
    EXPECT_EQ(parsed[0].first, "ours");
    EXPECT_EQ(parsed[1].second.size(), 6u);
    std::filesystem::remove_all(dir);
}

TEST(Csv, EmitReportsUnwritablePaths) {
    const auto dir = scratch("blocked");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    EXPECT_THROW(emit_results(run_experiment(small_config()), dir / "file" / "sub"), IoError);
    std::filesystem::remove_all(dir);
}

TEST(Sublinearity, LinearCurveHasSlopeOne) {
    std::vector<double> c;
    for (int t = 1; t <= 50; ++t) c.push_back(t);
    EXPECT_NEAR(sublinearity_check(c), 1.0, 0.01);
}

TEST(Sublinearity, SquareRootCurveHasSlopeOneHalf) {
    std::vector<double> c;
    for (int t = 1; t <= 50; ++t) c.push_back(std::sqrt(t));
    EXPECT_NEAR(sublinearity_check(c), 0.5, 0.01);
}

TEST(Sublinearity, SkipsNonpositivePointsAndNeedsFive) {
    std::vector<double> c;
    for (int t = 1; t <= 20; ++t) c.push_back(t % 2 ? -1.0 : 3.0 * t);
    EXPECT_NEAR(sublinearity_check(c), 1.0, 1e-9);
    std::vector<double> sparse(12, 0.0);
    sparse[10] = sparse[11] = 1.0;
    EXPECT_THROW(sublinearity_check(sparse), InvalidArgument);
    EXPECT_THROW(sublinearity_check(std::vector<double>(9, 1.0)), InvalidArgument);
}

TEST(Config, ParsesPresetsAndResolvesTheWindow) {
    const auto c = load_config(std::filesystem::path(RMAB_PRESET_DIR) / "one_dim_n10_m1.json");
    EXPECT_EQ(c.num_arms, 10u);
    EXPECT_EQ(c.episodes, 50u);
    EXPECT_EQ(c.runs, 50u);
    EXPECT_DOUBLE_EQ(c.drift_step(), 0.05);
    EXPECT_EQ(c.resolved_window(), 7u);
    const auto a = load_config(std::filesystem::path(RMAB_PRESET_DIR) / "aoi_n10_m1.json");
    EXPECT_EQ(a.environment.family, Family::Aoi);
    EXPECT_EQ(a.learner_config().index, IndexMethod::AoiClosedForm);
}

TEST(Config, DriftExponentSetsStepAndWindow) {
    const auto c = config_from_json(nlohmann::json::parse(R"({"T": 10000, "drift_exponent": 0.6, "N": 2})"));
    EXPECT_NEAR(c.drift_step(), std::pow(10000.0, -0.6), 1e-15);
    EXPECT_EQ(c.resolved_window(), 40u);
    const auto fixed = config_from_json(nlohmann::json::parse(R"({"T": 20, "window": 50})"));
    EXPECT_EQ(fixed.resolved_window(), 20u);
    const auto still = config_from_json(nlohmann::json::parse(R"({"T": 20, "environment": {"epsilon": 0}})"));
    EXPECT_EQ(still.resolved_window(), 20u);
}

TEST(Config, RejectsBadInput) {
    using nlohmann::json;
    EXPECT_THROW(config_from_json(json::parse(R"({"N": 2, "M": 3})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"gamma": 1.0})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"runs": 0})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"unknown": 1})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"environment": {"famly": "aoi"}})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"environment": {"family": "grid"}})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"policies": ["ours", "greedy"]})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"window": "sometimes"})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"H": "ten"})")), InvalidArgument);
    EXPECT_THROW(config_from_json(json::parse(R"({"generator": "pcg64"})")), InvalidArgument);
    EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, NullOptionalsFallBackToDefaults) {
    const auto c = config_from_json(nlohmann::json::parse(R"({"window": null, "drift_exponent": null})"));
    EXPECT_FALSE(c.window.has_value());
    EXPECT_FALSE(c.drift_exponent.has_value());
}
