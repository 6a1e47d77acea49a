#pragma once

#include <optional>

#include "hew/dsl.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Auto-sharding task: one strategy per node, minimizing node + edge costs
// under a time-varying memory budget. The construction order is fixed; the
// per-strategy scoring expression is the evolvable part. An enumeration
// oracle covers small instances.
// ---------------------------------------------------------------------------

struct ShardStrategy {
  int64_t cost = 0;
  int64_t memory = 0;
};

struct ShardNode {
  int64_t start = 0; // half-open interval [start, end)
  int64_t end = 0;
  std::vector<ShardStrategy> strategies;
};

struct ShardEdge {
  int u = 0;
  int v = 0;
  std::vector<std::vector<int64_t>> costs; // |strat(u)| x |strat(v)|
};

struct ShardProblem {
  int64_t budget = 0;
  std::vector<ShardNode> nodes;
  std::vector<ShardEdge> edges;

  void check() const; // throws BadInput
};

/// Strategy index per node, indexed by node position.
using ShardAssignment = std::vector<int>;

int64_t total_cost(const ShardProblem& p, const ShardAssignment& a); // throws IncompleteAssignment

struct MemoryCheck {
  bool ok = true;
  std::optional<int64_t> first_violation; // earliest violating time
};

/// Event sweep over interval starts/ends; budget is inclusive.
MemoryCheck peak_memory_ok(const ShardProblem& p, const ShardAssignment& a);

/// Per-(node, strategy) features available to the scoring expression, in
/// order: strategy_cost, strategy_memory, edge_cost_assigned,
/// edge_cost_unassigned_best, slack.
const FeatureCatalog& shard_feature_catalog();

/// Fixed node order (descending minimum strategy memory, ties by index), each
/// node taking the feasible-so-far strategy maximizing the score, then a
/// bounded single-node repair pass. nullopt = infeasible.
std::optional<ShardAssignment> heuristic_solve(const ShardProblem& p,
                                               const PolicyTemplate& scoring,
                                               const SlotAssignment& slots);

/// `-strategy_cost` scoring: the task's reward baseline.
PolicyTemplate shard_baseline_scoring();

struct ShardOracleResult {
  ShardAssignment assignment;
  int64_t cost = 0;
};

/// Exhaustive feasible minimum; guard: product of strategy counts <= 10^6.
/// Throws TooLarge / Infeasible.
ShardOracleResult oracle_solve(const ShardProblem& p);

std::string shard_to_json(const ShardProblem& p);
ShardProblem shard_from_json(const std::string& text); // throws BadInput

struct ShardGenConfig {
  int min_nodes = 6;
  int max_nodes = 24;
  int max_strategies = 4;
  int64_t horizon = 40;
};

/// Seeded random instance with a planted feasible assignment.
ShardProblem generate_shard_problem(uint64_t seed, const ShardGenConfig& cfg = {});

/// Hand-built instance where greedy cheapest-strategy is strictly suboptimal.
ShardProblem shard_counterexample();

} // namespace hew
