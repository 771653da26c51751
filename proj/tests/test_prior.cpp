#include <gtest/gtest.h>

#include "rmab/environments.hpp"
#include "rmab/prior.hpp"

using namespace rmab;

TEST(PriorKnowledge, StartsWithEveryRowDrifting) {
    const PriorKnowledge p(3, 0.1);
    EXPECT_EQ(p.z2_size(), 6u);
    EXPECT_EQ(p.z1_size(), 0u);
    EXPECT_EQ(p.allowed_count(2, 1), 3u);
    EXPECT_DOUBLE_EQ(p.epsilon(), 0.1);
}

TEST(PriorKnowledge, RowClassesAreCounted) {
    PriorKnowledge p(2, 0.0);
    p.set_row_class(0, 0, RowClass::Stationary);
    p.set_known(1, 1, {0.5, 0.5});
    EXPECT_EQ(p.z1_size(), 1u);
    EXPECT_EQ(p.z2_size(), 2u);
    EXPECT_EQ(p.row_class(1, 1), RowClass::Known);
}

TEST(PriorKnowledge, RestrictSupportMarksEverythingElseZero) {
    PriorKnowledge p(4, 0.0);
    p.restrict_support(1, 0, {0, 1});
    EXPECT_FALSE(p.structural_zero(1, 0, 0));
    EXPECT_FALSE(p.structural_zero(1, 0, 1));
    EXPECT_TRUE(p.structural_zero(1, 0, 2));
    EXPECT_TRUE(p.structural_zero(1, 0, 3));
    EXPECT_EQ(p.allowed_count(1, 0), 2u);
}

TEST(PriorKnowledge, ValidateRejectsEmptySupport) {
    PriorKnowledge p(2, 0.0);
    p.restrict_support(0, 1, {});
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(PriorKnowledge, ValidateRejectsBadKnownRows) {
    PriorKnowledge p(2, 0.0);
    p.set_known(0, 0, {0.4, 0.4});
    EXPECT_THROW(p.validate(), InvalidArgument);

    PriorKnowledge q(2, 0.0);
    q.restrict_support(0, 0, {0});
    q.set_known(0, 0, {0.5, 0.5});
    EXPECT_THROW(q.validate(), InvalidArgument);

    EXPECT_THROW(PriorKnowledge(2, 0.0).set_known(0, 0, {1.0}), InvalidArgument);
}

TEST(PriorKnowledge, RejectsNegativeDriftBound) {
    EXPECT_THROW(PriorKnowledge(2, -0.1), InvalidArgument);
    PriorKnowledge p(2, 0.0);
    EXPECT_THROW(p.set_epsilon(-1.0), InvalidArgument);
}

TEST(PriorKnowledge, ConsistencyChecksZerosAndKnownRows) {
    const auto k = one_dim_kernel(3, 0.5, 0.5);
    PriorKnowledge p(3, 0.0);
    p.restrict_support(0, 1, {0, 1});
    EXPECT_TRUE(p.consistent_with(k));
    p.restrict_support(0, 1, {0});
    EXPECT_FALSE(p.consistent_with(k));

    PriorKnowledge q(3, 0.0);
    q.set_known(2, 0, {0.0, 0.5, 0.5});
    EXPECT_TRUE(q.consistent_with(k));
    q.set_known(2, 0, {0.0, 0.4, 0.6});
    EXPECT_FALSE(q.consistent_with(k));
    EXPECT_FALSE(PriorKnowledge(4, 0.0).consistent_with(k));
}
