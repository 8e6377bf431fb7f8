#include "laws.hpp"

#include <gtest/gtest.h>

using namespace iscore::testing;

namespace {
constexpr int kCases = 250;
}

TEST(Laws, Replication) { EXPECT_EQ(law_replication(kCases), ""); }
TEST(Laws, NextShiftsByOneUnit) { EXPECT_EQ(law_next(kCases), ""); }
TEST(Laws, UnlessExclusivity) { EXPECT_EQ(law_unless(kCases), ""); }
TEST(Laws, BlockedSumIsDiscardedAndFiredGuardsHold) { EXPECT_EQ(law_blocked_sum(kCases), ""); }
TEST(Laws, StarPolicy) { EXPECT_EQ(law_star(kCases), ""); }
TEST(Laws, DeterministicStepIsByteReproducible) { EXPECT_EQ(law_deterministic_bytes(kCases), ""); }
TEST(Laws, WithinUnitMonotonicityRandomized) { EXPECT_EQ(law_within_unit_monotonicity(kCases), ""); }
