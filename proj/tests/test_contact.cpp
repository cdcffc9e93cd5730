#include <gtest/gtest.h>

#include "esplace/contact.hpp"
#include "esplace/oracle.hpp"
#include "esplace/rng.hpp"

using namespace esplace;

namespace {

ContactRule rule(double m0, double t0, bool directional = false) {
  ContactRule r;
  r.range_m0 = m0;
  r.delay_budget_s = t0;
  r.directional_forwarding = directional;
  return r;
}

}  // namespace

TEST(EarliestContact, ApproachingVehicleEntersRange) {
  const Node es{0, 0.0, 0.0, true};
  const Node car{1, 500.0, -25.0, false};
  const auto t = earliest_contact(es, car, 0.0, rule(200, 60));
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 12.0, 1e-12);
}

TEST(EarliestContact, AlreadyInRangeAtWindowStart) {
  const Node a{0, 100.0, 30.0, false};
  const Node b{1, 150.0, -20.0, false};
  EXPECT_EQ(earliest_contact(a, b, 3.5, rule(200, 60)), 3.5);
  EXPECT_EQ(earliest_contact(a, b, 0.0, rule(200, 60)), 0.0);
}

TEST(EarliestContact, RecedingPairNeverMeets) {
  const Node es{0, 0.0, 0.0, true};
  const Node car{1, 500.0, 25.0, false};
  EXPECT_FALSE(earliest_contact(es, car, 0.0, rule(200, 60)));
}

TEST(EarliestContact, WindowClosedBeforeStart) {
  // In range only during [0, 4): a passes b at 50 m/s relative speed.
  const Node a{0, 0.0, 50.0, false};
  const Node b{1, 0.0, 0.0, false};
  EXPECT_TRUE(earliest_contact(a, b, 3.9, rule(200, 60)));
  EXPECT_FALSE(earliest_contact(a, b, 4.1, rule(200, 60)));
}

TEST(EarliestContact, InvalidWindow) {
  const Node a{0, 0.0, 0.0, false}, b{1, 10.0, 0.0, false};
  try {
    earliest_contact(a, b, 61.0, rule(200, 60));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidWindow);
  }
}

TEST(EarliestContact, DirectionalRuleNeedsVehicleHeadingToServer) {
  const Node es{9, 1000.0, 0.0, true};
  const Node toward{0, 700.0, 25.0, false};
  const Node away{1, 900.0, -25.0, false};
  const auto r = rule(200, 60, true);
  ASSERT_TRUE(earliest_contact(toward, es, 0.0, r));
  EXPECT_NEAR(*earliest_contact(toward, es, 0.0, r), 4.0, 1e-12);
  // In range at t=0 but driving away from the server.
  EXPECT_FALSE(earliest_contact(away, es, 0.0, r));
  EXPECT_TRUE(earliest_contact(away, es, 0.0, rule(200, 60, false)));
  // Server-to-vehicle and vehicle-to-vehicle hops are unaffected.
  EXPECT_TRUE(earliest_contact(es, away, 0.0, r));
  EXPECT_TRUE(earliest_contact(toward, away, 0.0, r));
}

TEST(EarliestContact, SymmetricWithoutDirectionalRule) {
  Rng rng(21);
  for (int k = 0; k < 5000; ++k) {
    const Node a{0, rng.uniform(0, 3000), rng.uniform(-40, 40), rng.coin()};
    const Node b{1, rng.uniform(0, 3000), rng.uniform(-40, 40), rng.coin()};
    const auto r = rule(rng.uniform(50, 400), rng.uniform(1, 60));
    const double start = rng.uniform(0, r.delay_budget_s);
    EXPECT_EQ(earliest_contact(a, b, start, r), earliest_contact(b, a, start, r));
  }
}

TEST(EarliestContact, MatchesQuadraticRoots) {
  Rng rng(22);
  int defined = 0;
  for (int k = 0; k < 20000; ++k) {
    const Node a{0, rng.uniform(0, 3000), rng.uniform(-40, 40), rng.coin()};
    const Node b{1, rng.uniform(0, 3000), rng.coin() ? 0.0 : rng.uniform(-40, 40), rng.coin()};
    const auto r = rule(rng.uniform(50, 400), rng.uniform(1, 60), rng.coin());
    const double start = rng.uniform(0, r.delay_budget_s);
    const auto fast = earliest_contact(a, b, start, r);
    const auto ref = oracle::contact_time(a, b, start, r);
    ASSERT_EQ(fast.has_value(), ref.has_value()) << k;
    if (fast) {
      ++defined;
      EXPECT_NEAR(*fast, *ref, 1e-9);
    }
  }
  EXPECT_GT(defined, 1000);
}
