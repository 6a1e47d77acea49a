#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "hew/dsl.hpp"
#include "hew/egraph.hpp"
#include "hew/inline_sim.hpp"
#include "hew/shard.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Uniform task abstraction for the tuning and evolution loops. Evaluation is
// total: a bad candidate yields an Invalid report, never an exception.
// ---------------------------------------------------------------------------

struct RewardReport {
  std::optional<double> score; // nullopt = Invalid
  bool valid = false;
  std::vector<double> breakdown; // per-corpus-item rewards
  std::string diagnostics;
  int64_t eval_cost = 0; // elementary (per-item) evaluations performed

  static RewardReport invalid(std::string why) {
    RewardReport r;
    r.diagnostics = std::move(why);
    return r;
  }
};

std::string reward_report_to_json(const RewardReport& r);

struct Task {
  std::string id;
  const FeatureCatalog* catalog = nullptr;
  ExprType required_root = ExprType::Bool;
  std::function<RewardReport(const PolicyTemplate&, const SlotAssignment&)> evaluate;
};

/// Static validation gate: well-typedness against the task's catalog, the
/// required root type, and the size limits.
ValidationResult validate_for_task(const PolicyTemplate& t, const Task& task);

/// Score = mean of per-item percentage rewards. Any item failure
/// (PolicyEvaluationFailure, NoValidExtraction, Infeasible, slot errors)
/// makes the whole report Invalid.
Task make_inline_task(std::vector<Program> corpus, InlineMetric metric);

/// Items whose baseline extraction/solve fails are dropped up front so the
/// baseline candidate itself always scores exactly 0.
Task make_egraph_task(std::vector<EGraph> corpus);
Task make_shard_task(std::vector<ShardProblem> corpus);

/// Known task ids: inline-size | inline-perf | egraph | shard.
/// Corpus files are JSON arrays of task items (programs, e-graphs, or shard
/// problems). Generation is deterministic per (task, size, seed).
/// Both throw BadInput on an unknown task id or malformed corpus.
std::string generate_corpus_json(const std::string& task_id, int size, uint64_t seed);
Task make_task_from_corpus_json(const std::string& task_id,
                                const std::string& corpus_json);

/// The canonical seed template for a task's evolution run (always-false for
/// the inline tasks, the baseline priority/scoring for egraph/shard).
PolicyTemplate naive_seed_for_task(const std::string& task_id);

} // namespace hew
