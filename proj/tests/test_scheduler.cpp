#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qswitch/scheduler.hpp"

using namespace qswitch;

namespace {

LinkSnapshot snapshot(std::vector<std::uint8_t> up, std::vector<std::uint8_t> orient = {}) {
  LinkSnapshot s;
  if (orient.empty()) orient.assign(up.size(), 0);
  s.up = std::move(up);
  s.orient = std::move(orient);
  return s;
}

std::vector<FlowMask> masks_of(const std::vector<Matching>& ms) {
  std::vector<FlowMask> out;
  for (const auto& m : ms) out.push_back(m.mask);
  return out;
}

}  // namespace

TEST(EnumerateMatchings, ScenarioA) {
  const auto t = build_scenario(ScenarioTag::A, 0.5, 1.0).topology;
  // {}, {1}, {2}, {3}
  EXPECT_EQ(masks_of(enumerate_matchings(t)), (std::vector<FlowMask>{0b000, 0b001, 0b010, 0b100}));
}

TEST(EnumerateMatchings, ScenarioB) {
  const auto t = build_scenario(ScenarioTag::B, 0.5, 1.0).topology;
  // {}, {1}, {1,3}, {2}, {3}
  EXPECT_EQ(masks_of(enumerate_matchings(t)), (std::vector<FlowMask>{0b000, 0b001, 0b101, 0b010, 0b100}));
}

TEST(EnumerateMatchings, ScenarioCIsEverySubset) {
  const auto t = build_scenario(ScenarioTag::C, 0.5, 1.0).topology;
  EXPECT_EQ(masks_of(enumerate_matchings(t)),
            (std::vector<FlowMask>{0b000, 0b001, 0b011, 0b111, 0b101, 0b010, 0b110, 0b100}));
}

TEST(EnumerateMatchings, MatchesBruteForceOnRandomTopologies) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = oracle::random_topology(gen, 3 + trial % 6, 10);
    const auto got = enumerate_matchings(t);
    std::size_t expected = 0;
    for (FlowMask m = 0; m < (FlowMask{1} << t.num_flows()); ++m) expected += oracle::is_matching(t, m) ? 1 : 0;
    ASSERT_EQ(got.size(), expected);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_TRUE(oracle::is_matching(t, got[i].mask));
      if (i > 0) {
        const auto a = oracle::flows_of(got[i - 1].mask, t.num_flows());
        const auto b = oracle::flows_of(got[i].mask, t.num_flows());
        EXPECT_TRUE(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
      }
    }
  }
}

TEST(EnumerateMatchings, RejectsTooManyFlows) {
  SwitchTopology t;
  for (int u = 0; u < 8; ++u) {
    t.users.push_back(u);
    t.links.push_back(LinkParam::direct(0.5));
  }
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t b = a + 1; b < 8; ++b) t.flows.push_back(FlowSpec{t.flows.size(), {a, b}, 1.0, {}});
  }
  ASSERT_GT(t.num_flows(), kMaxFlows);
  EXPECT_THROW(enumerate_matchings(t), std::length_error);
}

TEST(Matching, VectorRoundTrip) {
  const std::vector<int> r{1, 0, 1, 1};
  const auto m = Matching::from_vector(r);
  EXPECT_EQ(m.mask, 0b1101U);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.as_vector(4), r);
}

TEST(Serviceable, Rules) {
  const auto t = build_scenario(ScenarioTag::A, 0.5, 1.0).topology;
  const auto f = t.flows[0];  // users 0 and 1
  EXPECT_TRUE(serviceable(f, snapshot({1, 1, 0}, {0, 0, 0}), ServiceRule::any_orientation));
  EXPECT_FALSE(serviceable(f, snapshot({1, 1, 0}, {0, 0, 0}), ServiceRule::opposite_parity));
  EXPECT_TRUE(serviceable(f, snapshot({1, 1, 0}, {0, 1, 0}), ServiceRule::opposite_parity));
  EXPECT_FALSE(serviceable(f, snapshot({1, 0, 1}), ServiceRule::any_orientation));
  EXPECT_EQ(serviceable_mask(t, snapshot({1, 1, 1}, {0, 1, 1}), ServiceRule::opposite_parity), 0b101U);
  EXPECT_EQ(serviceable_mask(t, snapshot({1, 1, 1}), ServiceRule::any_orientation), 0b111U);
}

TEST(MaxWeight, PicksLongestQueue) {
  const auto t = build_scenario(ScenarioTag::A, 1.0, 1.0).topology;
  const auto all = snapshot({1, 1, 1});
  const std::vector<std::int64_t> q{3, 5, 2};
  EXPECT_EQ(max_weight(t, all, q, ServiceRule::any_orientation).mask, 0b010U);
}

TEST(MaxWeight, ZeroWhenNothingServiceable) {
  const auto t = build_scenario(ScenarioTag::A, 1.0, 1.0).topology;
  const std::vector<std::int64_t> q{3, 5, 2};
  EXPECT_EQ(max_weight(t, snapshot({0, 0, 0}), q, ServiceRule::any_orientation).mask, 0U);
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1}), std::vector<std::int64_t>{0, 0, 0}, ServiceRule::any_orientation).mask,
            0U);
}

TEST(MaxWeight, SkipsUnserviceableAndEmpty) {
  const auto t = build_scenario(ScenarioTag::B, 1.0, 1.0).topology;
  // f1 = (0,1) empty, f2 = (1,2) large, f3 = (2,3)
  const std::vector<std::int64_t> q{0, 9, 4};
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1, 1}), q, ServiceRule::any_orientation).mask, 0b010U);
  // link 1 down: only f3 remains
  EXPECT_EQ(max_weight(t, snapshot({1, 0, 1, 1}), q, ServiceRule::any_orientation).mask, 0b100U);
}

TEST(MaxWeight, DisjointFlowsServedTogether) {
  const auto t = build_scenario(ScenarioTag::B, 1.0, 1.0).topology;
  const std::vector<std::int64_t> q{3, 5, 3};
  // f1 + f3 weight 6 beats f2 weight 5
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1, 1}), q, ServiceRule::any_orientation).mask, 0b101U);
}

TEST(MaxWeight, SwapProbabilityScalesWeight) {
  auto t = build_scenario(ScenarioTag::A, 1.0, 1.0).topology;
  t.flows[1].q = 0.25;
  const std::vector<std::int64_t> q{3, 5, 2};
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1}), q, ServiceRule::any_orientation).mask, 0b001U);
}

TEST(MaxWeight, LowestIndexTieBreak) {
  const auto t = build_scenario(ScenarioTag::A, 1.0, 1.0).topology;
  const std::vector<std::int64_t> q{4, 4, 4};
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1}), q, ServiceRule::any_orientation).mask, 0b001U);
  const std::vector<std::int64_t> q2{1, 4, 4};
  EXPECT_EQ(max_weight(t, snapshot({1, 1, 1}), q2, ServiceRule::any_orientation).mask, 0b010U);
}

TEST(MaxWeight, SeededRandomTieBreakIsUniformAndReproducible) {
  const auto t = build_scenario(ScenarioTag::A, 1.0, 1.0).topology;
  const MaxWeightScheduler sched(t, TieBreak::seeded_random);
  const RngStream rng(3, StreamKind::tie_break, 0);
  const std::vector<std::int64_t> q{4, 4, 4};
  std::vector<double> count(3, 0.0);
  const int n = 60000;
  for (int s = 0; s < n; ++s) {
    auto snap = snapshot({1, 1, 1});
    snap.step = static_cast<std::uint64_t>(s);
    const auto m = sched.select(snap, q, ServiceRule::any_orientation, &rng);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m, sched.select(snap, q, ServiceRule::any_orientation, &rng));
    for (std::size_t i = 0; i < 3; ++i) count[i] += m.contains(i) ? 1.0 : 0.0;
  }
  for (double c : count) EXPECT_NEAR(c / n, 1.0 / 3.0, 0.01);
}

// Brute force over all 2^K flow sets against the scheduler.
TEST(MaxWeight, OptimalOnRandomInstances) {
  std::mt19937_64 gen(2718);
  std::uniform_int_distribution<int> qlen(0, 6);
  std::bernoulli_distribution coin(0.6);
  int checked = 0;
  for (int trial = 0; trial < 12000; ++trial) {
    const auto t = oracle::random_topology(gen, 3 + trial % 5, 8);
    const std::size_t k = t.num_flows();
    LinkSnapshot snap;
    for (std::size_t u = 0; u < t.num_users(); ++u) {
      snap.up.push_back(coin(gen) ? 1 : 0);
      snap.orient.push_back(snap.up.back() && coin(gen) ? 1 : 0);
    }
    std::vector<std::int64_t> queues(k);
    for (auto& x : queues) x = qlen(gen);
    const auto rule = trial % 2 ? ServiceRule::opposite_parity : ServiceRule::any_orientation;

    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const auto [a, b] = t.flows[i].users;
      bool ok = snap.up[a] && snap.up[b];
      if (rule == ServiceRule::opposite_parity) ok = ok && snap.orient[a] != snap.orient[b];
      if (ok) w[i] = t.flows[i].q * static_cast<double>(queues[i]);
    }
    double best = 0.0;
    std::vector<int> best_list;
    bool have = false;
    for (FlowMask m = 0; m < (FlowMask{1} << k); ++m) {
      if (!oracle::is_matching(t, m)) continue;
      double s = 0.0;
      bool all_positive = true;
      for (auto i : oracle::flows_of(m, k)) {
        s += w[i];
        all_positive = all_positive && w[i] > 0.0;
      }
      if (!all_positive) continue;
      const auto list = oracle::flows_of(m, k);
      if (!have || s > best || (s == best && std::lexicographical_compare(list.begin(), list.end(),
                                                                           best_list.begin(), best_list.end()))) {
        best = s;
        best_list = list;
        have = true;
      }
    }
    const auto got = max_weight(t, snap, queues, rule);
    EXPECT_TRUE(oracle::is_matching(t, got.mask));
    EXPECT_DOUBLE_EQ(matching_weight(got, w), best);
    EXPECT_EQ(oracle::flows_of(got.mask, k), best_list);
    for (std::size_t i = 0; i < k; ++i) {
      if (got.contains(i)) {
        EXPECT_GT(w[i], 0.0);
      }
    }
    ++checked;
  }
  EXPECT_GE(checked, 10000);
}

TEST(MaxWeight, ScaleInvariant) {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> qlen(0, 9);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = oracle::random_topology(gen, 3 + trial % 4, 6);
    LinkSnapshot snap;
    for (std::size_t u = 0; u < t.num_users(); ++u) {
      snap.up.push_back(1);
      snap.orient.push_back(0);
    }
    std::vector<std::int64_t> q(t.num_flows()), q3(t.num_flows());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = qlen(gen);
      q3[i] = 3 * q[i];
    }
    EXPECT_EQ(max_weight(t, snap, q, ServiceRule::any_orientation),
              max_weight(t, snap, q3, ServiceRule::any_orientation));
  }
}

TEST(MaxWeight, WeightMonotoneInQueues) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> qlen(0, 9);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = oracle::random_topology(gen, 3 + trial % 4, 6);
    LinkSnapshot snap;
    for (std::size_t u = 0; u < t.num_users(); ++u) {
      snap.up.push_back(1);
      snap.orient.push_back(0);
    }
    std::vector<std::int64_t> q(t.num_flows());
    for (auto& x : q) x = qlen(gen);
    auto bigger = q;
    bigger[static_cast<std::size_t>(trial) % q.size()] += 1 + qlen(gen);
    const auto w0 = flow_weights(t, snap, q, ServiceRule::any_orientation);
    const auto w1 = flow_weights(t, snap, bigger, ServiceRule::any_orientation);
    const auto m0 = max_weight(t, snap, q, ServiceRule::any_orientation);
    const auto m1 = max_weight(t, snap, bigger, ServiceRule::any_orientation);
    EXPECT_GE(matching_weight(m1, w1), matching_weight(m0, w0));
  }
}
