#include "doctest.h"

#include "hew/shard.hpp"

using namespace hew;

namespace {

ShardNode node(int64_t start, int64_t end, std::vector<ShardStrategy> s) {
  return {start, end, std::move(s)};
}

// Three-node chain with one strategy each: costs 3, 4, 5 plus a free edge.
ShardProblem chain() {
  ShardProblem p;
  p.budget = 10;
  p.nodes = {node(0, 2, {{3, 1}}), node(1, 3, {{4, 1}}), node(2, 4, {{5, 1}})};
  p.edges = {{0, 1, {{0}}}, {1, 2, {{0}}}};
  return p;
}

} // namespace

TEST_CASE("total_cost sums node and edge costs") {
  ShardProblem p = chain();
  p.check();
  CHECK(total_cost(p, {0, 0, 0}) == 12);
  p.edges[0].costs = {{7}};
  CHECK(total_cost(p, {0, 0, 0}) == 19);
  CHECK_THROWS_AS(total_cost(p, {0, 0}), Error);      // incomplete
  CHECK_THROWS_AS(total_cost(p, {0, 0, -1}), Error);  // unassigned slot
}

TEST_CASE("memory sweep over half-open intervals") {
  ShardProblem p;
  p.budget = 5;
  p.nodes = {node(0, 4, {{1, 3}}), node(2, 6, {{1, 3}})};
  // Overlap on [2,4): 3 + 3 = 6 > 5.
  MemoryCheck m = peak_memory_ok(p, {0, 0});
  CHECK_FALSE(m.ok);
  CHECK(m.first_violation == 2); // earliest violating time is the overlap start

  SUBCASE("budget is inclusive") {
    p.budget = 6;
    CHECK(peak_memory_ok(p, {0, 0}).ok);
  }
  SUBCASE("half-open intervals do not overlap at the boundary") {
    p.nodes[1].start = 4;
    p.nodes[1].end = 8;
    CHECK(peak_memory_ok(p, {0, 0}).ok);
  }
  SUBCASE("disjoint intervals never interact") {
    p.nodes[1].start = 10;
    p.nodes[1].end = 12;
    p.budget = 3;
    CHECK(peak_memory_ok(p, {0, 0}).ok);
  }
}

TEST_CASE("heuristic solve on single-strategy problems") {
  ShardProblem p = chain();
  auto a = heuristic_solve(p, shard_baseline_scoring(), {});
  REQUIRE(a.has_value());
  CHECK(*a == ShardAssignment{0, 0, 0});
  CHECK(total_cost(p, *a) == 12);

  // Shrinking the budget below any feasible peak yields infeasibility.
  p.budget = 0;
  CHECK_FALSE(heuristic_solve(p, shard_baseline_scoring(), {}).has_value());
}

TEST_CASE("scoring expression drives the strategy choice") {
  ShardProblem p;
  p.budget = 100;
  p.nodes = {node(0, 2, {{10, 1}, {2, 1}})};
  // Baseline -strategy_cost picks the cheap strategy.
  auto a = heuristic_solve(p, shard_baseline_scoring(), {});
  REQUIRE(a.has_value());
  CHECK((*a)[0] == 1);
  // A cost-loving score picks the expensive one.
  auto b = heuristic_solve(p, parse_template("@strategy_cost"), {});
  REQUIRE(b.has_value());
  CHECK((*b)[0] == 0);
  // Ties resolve to the lower strategy index.
  auto c = heuristic_solve(p, parse_template("3"), {});
  REQUIRE(c.has_value());
  CHECK((*c)[0] == 0);
}

TEST_CASE("repair escapes a greedy memory trap when possible") {
  // Node 0 has a cheap memory-hungry strategy and a pricier slim one;
  // node 1 overlaps and only fits next to the slim choice.
  ShardProblem p;
  p.budget = 4;
  p.nodes = {node(0, 4, {{1, 4}, {5, 1}}), node(1, 3, {{2, 3}})};
  p.edges = {};
  p.check();
  auto a = heuristic_solve(p, shard_baseline_scoring(), {});
  REQUIRE(a.has_value());
  CHECK(peak_memory_ok(p, *a).ok);
  CHECK(*a == ShardAssignment{1, 0});
}

TEST_CASE("counterexample: cheapest-strategy greedy is strictly suboptimal") {
  ShardProblem p = shard_counterexample();
  p.check();
  auto greedy = heuristic_solve(p, shard_baseline_scoring(), {});
  REQUIRE(greedy.has_value());
  REQUIRE(peak_memory_ok(p, *greedy).ok);
  ShardOracleResult best = oracle_solve(p);
  CHECK(total_cost(p, *greedy) == 11);
  CHECK(best.cost == 2);
  CHECK(total_cost(p, *greedy) > best.cost);
}

TEST_CASE("oracle enumeration") {
  ShardProblem p = chain();
  ShardOracleResult r = oracle_solve(p);
  CHECK(r.cost == 12);
  CHECK(r.assignment == ShardAssignment{0, 0, 0});

  SUBCASE("infeasible problems throw") {
    p.budget = 0;
    CHECK_THROWS_AS(oracle_solve(p), Error);
  }
  SUBCASE("oversized spaces throw") {
    ShardProblem big;
    big.budget = 1000;
    for (int i = 0; i < 21; ++i)
      big.nodes.push_back(node(i, i + 1, {{1, 0}, {2, 0}}));
    big.check();
    CHECK_THROWS_AS(oracle_solve(big), Error); // 2^21 > 10^6
  }
}

TEST_CASE("generated instances are feasible and oracle-dominated") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    ShardProblem p = generate_shard_problem(seed, {4, 8, 3, 30});
    p.check();
    auto a = heuristic_solve(p, shard_baseline_scoring(), {});
    REQUIRE(a.has_value());
    CHECK(peak_memory_ok(p, *a).ok);
    ShardOracleResult best = oracle_solve(p);
    CHECK(total_cost(p, *a) >= best.cost);
    CHECK(peak_memory_ok(p, best.assignment).ok);
  }
}

TEST_CASE("json round trip") {
  for (uint64_t seed : {2ull, 13ull}) {
    ShardProblem p = generate_shard_problem(seed);
    ShardProblem q = shard_from_json(shard_to_json(p));
    q.check();
    CHECK(shard_to_json(p) == shard_to_json(q));
  }
  CHECK_THROWS_AS(shard_from_json("{"), Error);
}

TEST_CASE("problem check rejects malformed instances") {
  ShardProblem p = chain();
  SUBCASE("edge endpoint out of range") {
    p.edges.push_back({0, 9, {{0}}});
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("edge cost matrix shape mismatch") {
    p.edges[0].costs = {{0, 0}};
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("empty strategy list") {
    p.nodes[0].strategies.clear();
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("inverted interval") {
    p.nodes[0].start = 5;
    p.nodes[0].end = 2;
    CHECK_THROWS_AS(p.check(), Error);
  }
}
