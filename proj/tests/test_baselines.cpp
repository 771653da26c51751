#include <gtest/gtest.h>

#include <cmath>

#include "rmab/baselines.hpp"
#include "rmab/harness.hpp"

using namespace rmab;

TEST(RandomPolicy, ActivatesEveryArmWhenBudgetEqualsN) {
    RandomPolicy p(4, 4, 1);
    const std::vector<State> s(4, 0);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(p.select(s, 1, 1), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(RandomPolicy, EachArmIsPickedATenthOfTheTime) {
    RandomPolicy p(10, 1, 7);
    const std::vector<State> s(10, 0);
    std::vector<int> hits(10, 0);
    const int slots = 100000;
    for (int i = 0; i < slots; ++i) {
        const auto a = p.select(s, 1, 1);
        ASSERT_EQ(a.size(), 1u);
        ++hits[a[0]];
    }
    for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / slots, 0.1, 0.005);
}

TEST(RandomPolicy, SameSeedRepeatsTheSequence) {
    RandomPolicy a(10, 3, 5), b(10, 3, 5), c(10, 3, 6);
    const std::vector<State> s(10, 0);
    bool differs = false;
    for (int i = 0; i < 200; ++i) {
        const auto x = a.select(s, 1, 1);
        EXPECT_EQ(x, b.select(s, 1, 1));
        differs = differs || x != c.select(s, 1, 1);
    }
    EXPECT_TRUE(differs);
}

TEST(RandomPolicy, SubsetsAreDistinctAndSorted) {
    RandomStream rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto a = RandomPolicy::sample_subset(rng, 8, 5);
        ASSERT_EQ(a.size(), 5u);
        EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
        EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
    }
    EXPECT_THROW(RandomPolicy(3, 4, 1), InvalidArgument);
}

TEST(Wiql, UpdateMovesTowardTheTargetByTheStepSize) {
    WiqlConfig c;
    c.gamma = 0.9;
    WiqlPolicy p({3}, c, 1);
    p.observe(0, 1, 1, 2.0, 2);
    EXPECT_DOUBLE_EQ(p.q(0, 1, 1), 2.0);  // alpha = 1 on the first visit
    p.observe(0, 2, 0, 1.0, 1);
    EXPECT_DOUBLE_EQ(p.q(0, 2, 0), 1.0 + 0.9 * 2.0);
    const double before = p.q(0, 1, 1);
    const double target = 0.5 + 0.9 * std::max(p.q(0, 2, 0), p.q(0, 2, 1));
    p.observe(0, 1, 1, 0.5, 2);
    EXPECT_DOUBLE_EQ(p.q(0, 1, 1), before + 0.5 * (target - before));
    EXPECT_EQ(p.visits(0, 1, 1), 2u);
    EXPECT_DOUBLE_EQ(p.priority(0, 1), p.q(0, 1, 1) - p.q(0, 1, 0));
}

TEST(Wiql, UnvisitedTiesGoToTheLowestArmIds) {
    WiqlConfig c;
    c.budget = 2;
    c.explore_scale = 1e-300;
    WiqlPolicy p({3, 3, 3, 3}, c, 2);
    const std::vector<State> s{0, 1, 2, 0};
    p.select(s, 1, 1);  // the very first slot always explores
    for (int i = 0; i < 10; ++i) EXPECT_EQ(p.select(s, 1, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(Wiql, GreedySelectionFollowsTheQGap) {
    WiqlConfig c;
    c.explore_scale = 1e-300;
    WiqlPolicy p({2, 2, 2}, c, 3);
    p.observe(2, 1, 1, 5.0, 0);
    const std::vector<State> s{1, 1, 1};
    p.select(s, 1, 1);
    EXPECT_EQ(p.select(s, 1, 2), (std::vector<std::size_t>{2}));
}

TEST(Wiql, ExplorationDecaysOverSlots) {
    WiqlConfig c;
    c.explore_scale = 10.0;
    WiqlPolicy p({2, 2, 2, 2, 2, 2, 2, 2, 2, 2}, c, 4);
    const std::vector<State> s(10, 0);
    int early = 0, late = 0;
    for (int i = 0; i < 20; ++i) early += p.select(s, 1, 1)[0] != 0;
    for (int i = 0; i < 100000; ++i) p.select(s, 1, 1);
    for (int i = 0; i < 1000; ++i) late += p.select(s, 1, 1)[0] != 0;
    EXPECT_GT(early, 5);
    EXPECT_LT(late, 5);
}

TEST(UcWhittle, KeepsStructureButDropsDrift) {
    const auto truth = build_environment(EnvironmentSpec::one_dim(), 4, 10, 3);
    const std::vector<std::size_t> w(4, 3);
    auto p = ucwhittle_policy(learner_arms(truth, w), LearnerConfig{}, 10);
    EXPECT_EQ(p->name(), "ucwhittle");
    p->begin_episode(1);
    const auto& counts = p->counts(0);
    EXPECT_EQ(counts.window(), 10u);
    EXPECT_EQ(counts.prior().z2_size(), 0u);
    EXPECT_EQ(counts.prior().z1_size(), 20u);
    EXPECT_DOUBLE_EQ(counts.prior().epsilon(), 0.0);
    EXPECT_TRUE(counts.prior().structural_zero(5, 0, 7));
    EXPECT_EQ(p->counts(3).prior().row_class(2, 1), RowClass::Known);
}
