#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rmab/environments.hpp"
#include "rmab/whittle.hpp"

using namespace rmab;

namespace {

// Same dynamics for both actions.
TransitionKernel action_blind(std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    const auto p = oracle::random_kernel(n, rng);
    std::vector<double> dense(p.dense().begin(), p.dense().end());
    for (State s = 0; s < n; ++s) {
        for (State j = 0; j < n; ++j) dense[(s * 2 + 1) * n + j] = p(s, 0, j);
    }
    return TransitionKernel(n, dense);
}

RewardTable bonus_rewards(std::vector<double> base, double bonus) {
    std::vector<std::array<double, 2>> r;
    for (double x : base) r.push_back({x, x + bonus});
    return RewardTable(r);
}

WhittleOptions symmetric_bracket(const RewardTable& r, double gamma) {
    WhittleOptions o;
    const double m = default_lambda_max(r, gamma) + 1.0;
    o.lambda_lo = -m;
    o.lambda_max = m;
    return o;
}

}  // namespace

TEST(ActivateSet, EmptyWhenActivationOnlyCosts) {
    const auto k = action_blind(3, 1);
    EXPECT_TRUE(activate_set(k, bonus_rewards({0.1, 0.5, 0.2}, 0.0), 0.3, 0.9).empty());
}

TEST(ActivateSet, AllStatesWhenActivationPaysAtZeroCost) {
    const auto k = action_blind(3, 2);
    EXPECT_EQ(activate_set(k, bonus_rewards({0.1, 0.5, 0.2}, 1.0), 0.0, 0.9), (std::vector<State>{0, 1, 2}));
}

TEST(ActivateSet, OneDimK3MatchesPolicyEnumeration) {
    const auto k = one_dim_kernel(3, 0.5, 0.5);
    const auto r = one_dim_rewards(3);
    const auto set = activate_set(k, r, 0.1, 0.99);
    std::vector<State> expected;
    for (State s = 0; s < 3; ++s) {
        if (oracle::advantage(k, r, 0.1, 0.99, s) > 0.0) expected.push_back(s);
    }
    EXPECT_EQ(set, expected);
}

TEST(IndexabilityProbe, BonusInstanceShrinksFromAllToNone) {
    const auto k = action_blind(3, 4);
    const auto r = bonus_rewards({0.2, 0.4, 0.9}, 1.0);
    const std::vector<double> grid{0.0, 0.5, 1.5, 3.0};
    const auto rep = indexability_probe(k, r, 0.9, grid);
    EXPECT_TRUE(rep.indexable);
    EXPECT_EQ(rep.active_set_sizes, (std::vector<std::size_t>{3, 3, 0, 0}));
}

TEST(IndexabilityProbe, SingleStateIsIndexable) {
    const TransitionKernel k(1, {1.0, 1.0});
    const std::vector<double> grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    EXPECT_TRUE(indexability_probe(k, RewardTable({{0.0, 0.5}}), 0.9, grid).indexable);
}

TEST(IndexabilityProbe, OneDimArmIsIndexableWithNestedSets) {
    const auto k = one_dim_kernel(10, 0.5, 0.5);
    const auto r = one_dim_rewards(10);
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);
    const auto rep = indexability_probe(k, r, 0.99, grid);
    EXPECT_TRUE(rep.indexable);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto prev = activate_set(k, r, grid[i - 1], 0.99);
        const auto cur = activate_set(k, r, grid[i], 0.99);
        EXPECT_EQ(cur, rep.active_sets[i]);
        EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
    }
}

TEST(IndexabilityProbe, RejectsUnsortedGrid) {
    const auto k = one_dim_kernel(3, 0.5, 0.5);
    const std::vector<double> grid{0.0, 0.5, 0.2};
    EXPECT_THROW(indexability_probe(k, one_dim_rewards(3), 0.9, grid), InvalidArgument);
}

TEST(WhittleIndex, ActionBlindArmHasZeroIndex) {
    const auto k = action_blind(3, 5);
    const auto r = bonus_rewards({0.3, 0.1, 0.6}, 0.0);
    for (State s = 0; s < 3; ++s) EXPECT_NEAR(whittle_index(k, r, 0.9, s), 0.0, 2e-4);
}

TEST(WhittleIndex, ConstantBonusIsTheIndex) {
    const auto k = action_blind(3, 6);
    const auto r = bonus_rewards({0.3, 0.1, 0.6}, 0.7);
    for (State s = 0; s < 3; ++s) EXPECT_NEAR(whittle_index(k, r, 0.9, s), 0.7, 2e-4);
}

TEST(WhittleIndex, BracketErrorCarriesBothEnds) {
    const auto k = action_blind(2, 7);
    const auto r = bonus_rewards({0.0, 1.0}, 5.0);
    WhittleOptions o;
    o.lambda_max = 1.0;
    try {
        whittle_index(k, r, 0.9, 0, o);
        FAIL() << "expected BracketError";
    } catch (const BracketError& e) {
        EXPECT_GT(e.delta_lo(), 0.0);
        EXPECT_GT(e.delta_hi(), 0.0);
    }
}

TEST(WhittleIndex, MatchesLambdaGridOracleOnSmallCorpus) {
    const auto corpus = oracle::small_corpus();
    ASSERT_GE(corpus.size(), 20u);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& c = corpus[i];
        const auto opts = symmetric_bracket(c.rewards, c.gamma);
        for (State s = 0; s < c.kernel.num_states(); ++s) {
            const double w = whittle_index(c.kernel, c.rewards, c.gamma, s, opts);
            const double ref = oracle::grid_index(c.kernel, c.rewards, c.gamma, s, opts.lambda_lo,
                                                  *opts.lambda_max, opts.search_tol / 2.0);
            EXPECT_NEAR(w, ref, 2.0 * opts.search_tol) << "instance " << i << " state " << s;
        }
    }
}

TEST(WhittleIndex, ScalesWithRewards) {
    const auto k = one_dim_kernel(5, 0.4, 0.7);
    const auto r = one_dim_rewards(5);
    const double c = 3.0;
    const auto base = whittle_index_table(k, r, 0.9);
    const auto scaled = whittle_index_table(k, r.affine(c, 0.0), 0.9);
    for (State s = 0; s < 5; ++s) EXPECT_NEAR(scaled(s), c * base(s), 2.0 * c * 1e-4);
}

TEST(WhittleIndex, TableAgreesWithActivateSets) {
    const auto k = one_dim_kernel(6, 0.5, 0.5);
    const auto r = one_dim_rewards(6);
    const auto table = whittle_index_table(k, r, 0.9);
    std::vector<double> sorted = table.w;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i + 1] - sorted[i] < 1e-3) continue;
        const double lambda = 0.5 * (sorted[i] + sorted[i + 1]);
        std::vector<State> expected;
        for (State s = 0; s < 6; ++s) {
            if (table(s) > lambda) expected.push_back(s);
        }
        EXPECT_EQ(activate_set(k, r, lambda, 0.9), expected) << "lambda " << lambda;
    }
}

TEST(AoiIndex, ClosedFormMatchesBisectionAtHalfSuccess) {
    const std::size_t k = 100;
    const auto kernel = aoi_kernel(k, 0.5);
    const auto rewards = aoi_rewards(k, 0.9);
    for (std::size_t age = 1; age <= 10; ++age) {
        const double w = whittle_index(kernel, rewards, 0.99, age - 1);
        EXPECT_NEAR(aoi_closed_form_index(0.5, 0.9, age, 0.99), w, 0.02 * std::abs(w)) << "age " << age;
    }
}

TEST(AoiIndex, AverageCostFormAtFullSuccessMatchesNearlyUndiscountedBisection) {
    const std::size_t k = 60;
    const auto kernel = aoi_kernel(k, 1.0);
    const auto rewards = aoi_rewards(k, 0.9);
    for (std::size_t age = 1; age <= 10; ++age) {
        const double w = whittle_index(kernel, rewards, 0.999, age - 1);
        EXPECT_NEAR(aoi_closed_form_index(1.0, 0.9, age), w, 0.02 * std::abs(w)) << "age " << age;
    }
}

TEST(AoiIndex, IncreasesWithAge) {
    for (double q : {0.2, 0.5, 1.0}) {
        for (std::size_t age = 1; age < 10; ++age) {
            EXPECT_LE(aoi_closed_form_index(q, 0.9, age), aoi_closed_form_index(q, 0.9, age + 1));
            EXPECT_LE(aoi_closed_form_index(q, 0.9, age, 0.99), aoi_closed_form_index(q, 0.9, age + 1, 0.99));
        }
    }
}

TEST(AoiIndex, TruncatedTableMatchesBisectionOnSameKernel) {
    for (double q : {0.1, 0.45, 1.0}) {
        const auto kernel = aoi_kernel(30, q);
        const auto rewards = aoi_rewards(30, 0.9);
        const auto fast = aoi_index_table(kernel, rewards, 0.95);
        const auto slow = whittle_index_table(kernel, rewards, 0.95);
        for (State s = 0; s < 30; ++s) EXPECT_NEAR(fast(s), slow(s), 2e-4) << "q " << q << " state " << s;
    }
}

TEST(AoiIndex, TruncatedTableHandlesAgeDependentSuccess) {
    const std::size_t k = 12;
    std::vector<double> dense(k * 2 * k, 0.0);
    for (State s = 0; s < k; ++s) {
        const State up = std::min(s + 1, k - 1);
        const double q = 0.1 + 0.07 * static_cast<double>(s);
        dense[(s * 2) * k + up] = 1.0;
        dense[(s * 2 + 1) * k + 0] += q;
        dense[(s * 2 + 1) * k + up] += 1.0 - q;
    }
    const TransitionKernel kernel(k, dense);
    const auto rewards = aoi_rewards(k, 0.9);
    const auto fast = aoi_index_table(kernel, rewards, 0.9);
    const auto slow = whittle_index_table(kernel, rewards, 0.9);
    for (State s = 0; s < k; ++s) EXPECT_NEAR(fast(s), slow(s), 2e-4) << "state " << s;
}

TEST(AoiIndex, RejectsNonAoiKernel) {
    EXPECT_THROW(aoi_success_probabilities(one_dim_kernel(4, 0.5, 0.5)), InvalidArgument);
    EXPECT_THROW(aoi_closed_form_index(0.0, 0.9, 1), InvalidArgument);
    EXPECT_THROW(aoi_closed_form_index(0.5, 1.0, 1), InvalidArgument);
    EXPECT_THROW(aoi_closed_form_index(0.5, 0.9, 0), InvalidArgument);
}
