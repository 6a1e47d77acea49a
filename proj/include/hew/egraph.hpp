#pragma once

#include <set>

#include "hew/dsl.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// E-graph extraction task: pick one e-node per reachable e-class, acyclically,
// minimizing the DAG cost (each selected class counted once). Heuristic
// extraction is driven by an evolvable priority expression; an enumeration
// oracle covers small instances.
// ---------------------------------------------------------------------------

struct ENode {
  std::string op;
  int64_t cost = 0;
  std::vector<std::string> children; // e-class ids
};

struct EClass {
  std::string id;
  std::vector<ENode> nodes;
};

struct EGraph {
  std::vector<EClass> classes;
  std::set<std::string> roots;

  const EClass& eclass(const std::string& id) const;
  void check() const; // throws BadInput
};

/// Chosen node index per class; defined exactly on the classes reachable from
/// the roots under the choice itself.
using Extraction = std::map<std::string, int>;

struct ExtractionReport {
  bool valid = true;
  std::vector<std::string> violations;
};

ExtractionReport is_valid_extraction(const EGraph& g, const Extraction& x);

int64_t extraction_cost(const EGraph& g, const Extraction& x); // throws InvalidExtraction

/// Node-local features available to the priority expression, in order:
/// node_cost, arity, settled_subtree_cost, class_size.
const FeatureCatalog& egraph_feature_catalog();

/// Bottom-up saturation; among the ready nodes of a class, the one maximizing
/// the priority expression wins (ties by node index).
/// Throws NoValidExtraction when the graph has none.
Extraction greedy_extract(const EGraph& g, const PolicyTemplate& priority,
                          const SlotAssignment& slots);

/// `-node_cost` priority: the task's reward baseline.
PolicyTemplate egraph_baseline_priority();

struct OracleResult {
  Extraction extraction;
  int64_t cost = 0;
};

/// Exhaustive enumeration; guard: product of node counts over root-reachable
/// classes must not exceed 10^6. Throws TooLarge / NoValidExtraction.
OracleResult oracle_extract(const EGraph& g);

std::string egraph_to_json(const EGraph& g);
EGraph egraph_from_json(const std::string& text); // throws BadInput

struct EGraphGenConfig {
  int min_classes = 10;
  int max_classes = 200;
};

/// Seeded random DAG-like e-graph with a planted cheap extraction.
EGraph generate_egraph(uint64_t seed, const EGraphGenConfig& cfg = {});

/// Hand-built instance where greedy(-cost) is strictly suboptimal.
EGraph egraph_counterexample();

} // namespace hew
