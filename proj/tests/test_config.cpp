#include <gtest/gtest.h>

#include <cmath>

#include "qswitch/config.hpp"

using namespace qswitch;

TEST(Config, ExplicitTopology) {
  const auto t = topology_from_string(R"({
    "users": [10, 20, 30],
    "links": [{"p": 0.5}, {"pnla": 0.01, "m": 100}, {"pnla": 0.25}],
    "flows": [{"users": [10, 20]}, {"users": [20, 30], "q": 0.5, "rci": 0.8}]
  })");
  EXPECT_EQ(t.users, (std::vector<int>{10, 20, 30}));
  EXPECT_DOUBLE_EQ(t.links[0].p, 0.5);
  EXPECT_NEAR(t.links[1].p, 1.0 - std::pow(0.99, 100), 1e-14);
  EXPECT_NEAR(t.links[2].p, 1.0 - std::pow(0.75, 4), 1e-14);
  EXPECT_EQ(t.flows[1].users, (std::pair<std::size_t, std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(t.flows[0].q, 1.0);
  EXPECT_FALSE(t.flows[0].rci.has_value());
  EXPECT_DOUBLE_EQ(*t.flows[1].rci, 0.8);
}

TEST(Config, UserCountAndTransmissivity) {
  const auto t = topology_from_string(R"({
    "users": 2,
    "links": [{"eta": 1e-4, "m": 10}, {"eta": 1e-4, "c": 0.5}],
    "flows": [{"users": [1, 2]}]
  })");
  EXPECT_EQ(t.users, (std::vector<int>{1, 2}));
  EXPECT_NEAR(t.links[0].p, 1.0 - std::pow(0.9, 10), 1e-12);
  EXPECT_NEAR(t.links[1].p, 1.0 - std::pow(0.95, 20), 1e-12);
}

TEST(Config, Scenario) {
  const auto t = topology_from_string(R"({"scenario": {"tag": "B", "p": 0.632, "q": 0.9}})");
  EXPECT_EQ(t.num_flows(), 3u);
  EXPECT_EQ(t.num_links(), 4u);
  EXPECT_DOUBLE_EQ(t.flows[2].q, 0.9);
  const auto d = topology_from_string(R"({"scenario": {"tag": "a", "pnla": 0.001}})");
  EXPECT_NEAR(d.links[0].p, 0.6323045752290359, 1e-12);
}

TEST(Config, RoundTrip) {
  const auto t = topology_from_string(R"({
    "users": [1, 2, 3, 4],
    "links": [{"p": 0.5}, {"pnla": 0.1, "m": 7}, {"p": 0.25}, {"p": 1.0}],
    "flows": [{"users": [1, 2], "rci": 0.3}, {"users": [3, 4], "q": 0.75}]
  })");
  const auto back = topology_from_json(topology_to_json(t));
  ASSERT_EQ(back.num_links(), 4u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(back.links[j].p, t.links[j].p);
  EXPECT_TRUE(back.links[1].is_derived());
  EXPECT_EQ(back.flows[1].users, t.flows[1].users);
  EXPECT_DOUBLE_EQ(back.flows[1].q, 0.75);
  EXPECT_DOUBLE_EQ(*back.flows[0].rci, 0.3);
}

TEST(Config, Errors) {
  EXPECT_THROW(topology_from_string("{not json"), ConfigError);
  EXPECT_THROW(topology_from_string("[]"), ConfigError);
  EXPECT_THROW(topology_from_string(R"({"links": [], "flows": []})"), ConfigError);
  EXPECT_THROW(topology_from_string(R"({"users": 2, "links": [{"p": 0.5}], "flows": []})"), ConfigError);
  EXPECT_THROW(topology_from_string(R"({"users": 2, "links": [{"p": 0.5}, {"p": 1.5}], "flows": []})"),
               ConfigError);
  EXPECT_THROW(topology_from_string(R"({"users": 2, "links": [{"p": 0.5}, {}], "flows": []})"), ConfigError);
  EXPECT_THROW(
      topology_from_string(R"({"users": 2, "links": [{"p": 0.5}, {"p": 0.5}], "flows": [{"users": [1, 3]}]})"),
      ConfigError);
  EXPECT_THROW(
      topology_from_string(R"({"users": 2, "links": [{"p": 0.5}, {"p": 0.5}], "flows": [{"users": [1, 1]}]})"),
      ConfigError);
  EXPECT_THROW(topology_from_string(R"({"users": 2, "links": [{"p": 0.5, "pnla": 0.1}, {"p": 0.5}], "flows": []})"),
               ConfigError);
  EXPECT_THROW(topology_from_string(R"({"scenario": {"tag": "Z", "p": 0.5}})"), ConfigError);
  EXPECT_THROW(topology_from_string(R"({"scenario": {"tag": "A", "p": "high"}})"), ConfigError);
  EXPECT_THROW(load_topology("/nonexistent/topology.json"), ConfigError);
}

TEST(Config, ViolationsAreListed) {
  try {
    topology_from_string(R"({"users": 3, "links": [{"p": 0.5}, {"p": 0.5}, {"p": 0.5}],
                             "flows": [{"users": [1, 2]}, {"users": [2, 1]}]})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicates"), std::string::npos);
  }
}
