#include "hew/harness.hpp"

#include <numeric>

#include "json.hpp"

#include "hew/features.hpp"
#include "hew/reference_policies.hpp"

namespace hew {

using json = nlohmann::json;

std::string reward_report_to_json(const RewardReport& r) {
  json j{{"score", r.valid ? json(*r.score) : json(nullptr)},
         {"valid", r.valid},
         {"breakdown", r.breakdown},
         {"diagnostics", r.diagnostics},
         {"eval_cost", r.eval_cost}};
  return j.dump(2) + "\n";
}

ValidationResult validate_for_task(const PolicyTemplate& t, const Task& task) {
  return validate_template(t, *task.catalog, task.required_root);
}

namespace {

// Runs per-item rewards and aggregates by arithmetic mean; any item failure
// invalidates the whole report.
RewardReport aggregate(size_t n,
                       const std::function<double(size_t)>& item_reward) {
  RewardReport rep;
  rep.eval_cost = static_cast<int64_t>(n);
  try {
    for (size_t i = 0; i < n; ++i) rep.breakdown.push_back(item_reward(i));
  } catch (const Error& e) {
    rep.eval_cost = static_cast<int64_t>(rep.breakdown.size()) + 1;
    rep.breakdown.clear();
    rep.diagnostics = e.what();
    return rep;
  }
  double sum = std::accumulate(rep.breakdown.begin(), rep.breakdown.end(), 0.0);
  rep.score = rep.breakdown.empty() ? 0.0 : sum / static_cast<double>(n);
  rep.valid = true;
  return rep;
}

} // namespace

Task make_inline_task(std::vector<Program> corpus, InlineMetric metric) {
  auto items = std::make_shared<std::vector<Program>>(std::move(corpus));
  Task task;
  task.id = metric == InlineMetric::Size ? "inline-size" : "inline-perf";
  task.catalog = &inline_feature_catalog();
  task.required_root = ExprType::Bool;
  task.evaluate = [items, metric](const PolicyTemplate& t,
                                  const SlotAssignment& slots) {
    return aggregate(items->size(), [&](size_t i) {
      DecisionFn policy = [&](const Program& p, const CallSite& cs) {
        return eval_template_bool(t, inline_feature_catalog(), slots,
                                  compute_features(p, cs));
      };
      RunPolicyOptions opts;
      opts.metric = metric;
      return run_policy((*items)[i], policy, opts).reward;
    });
  };
  return task;
}

Task make_egraph_task(std::vector<EGraph> corpus) {
  // Baselines are fixed per item; items the baseline cannot extract are
  // dropped so the baseline priority scores exactly 0.
  auto items = std::make_shared<std::vector<std::pair<EGraph, int64_t>>>();
  PolicyTemplate baseline = egraph_baseline_priority();
  for (auto& g : corpus) {
    try {
      int64_t cost = extraction_cost(g, greedy_extract(g, baseline, {}));
      items->emplace_back(std::move(g), cost);
    } catch (const Error&) {
    }
  }
  Task task;
  task.id = "egraph";
  task.catalog = &egraph_feature_catalog();
  task.required_root = ExprType::Int;
  task.evaluate = [items](const PolicyTemplate& t, const SlotAssignment& slots) {
    return aggregate(items->size(), [&](size_t i) {
      const auto& [g, base] = (*items)[i];
      int64_t cost = extraction_cost(g, greedy_extract(g, t, slots));
      return base == 0 ? 0.0
                       : 100.0 * static_cast<double>(base - cost) /
                             static_cast<double>(base);
    });
  };
  return task;
}

Task make_shard_task(std::vector<ShardProblem> corpus) {
  auto items = std::make_shared<std::vector<std::pair<ShardProblem, int64_t>>>();
  PolicyTemplate baseline = shard_baseline_scoring();
  for (auto& p : corpus) {
    if (auto a = heuristic_solve(p, baseline, {})) {
      int64_t cost = total_cost(p, *a);
      items->emplace_back(std::move(p), cost);
    }
  }
  Task task;
  task.id = "shard";
  task.catalog = &shard_feature_catalog();
  task.required_root = ExprType::Int;
  task.evaluate = [items](const PolicyTemplate& t, const SlotAssignment& slots) {
    return aggregate(items->size(), [&](size_t i) {
      const auto& [p, base] = (*items)[i];
      auto a = heuristic_solve(p, t, slots);
      if (!a) throw Error(ErrorCode::Infeasible, "heuristic found no assignment");
      int64_t cost = total_cost(p, *a);
      return base == 0 ? 0.0
                       : 100.0 * static_cast<double>(base - cost) /
                             static_cast<double>(base);
    });
  };
  return task;
}

namespace {

bool known_task(const std::string& id) {
  return id == "inline-size" || id == "inline-perf" || id == "egraph" ||
         id == "shard";
}

} // namespace

std::string generate_corpus_json(const std::string& task_id, int size,
                                 uint64_t seed) {
  if (!known_task(task_id))
    throw Error(ErrorCode::BadInput, "unknown task: " + task_id);
  if (size < 0) throw Error(ErrorCode::BadInput, "negative corpus size");
  json arr = json::array();
  for (int i = 0; i < size; ++i) {
    uint64_t s = mix_seed(seed, static_cast<uint64_t>(i));
    if (task_id == "egraph") {
      arr.push_back(json::parse(egraph_to_json(generate_egraph(s))));
    } else if (task_id == "shard") {
      arr.push_back(json::parse(shard_to_json(generate_shard_problem(s))));
    } else {
      arr.push_back(json::parse(program_to_json(generate_program(s))));
    }
  }
  return arr.dump(2) + "\n";
}

Task make_task_from_corpus_json(const std::string& task_id,
                                const std::string& corpus_json) {
  if (!known_task(task_id))
    throw Error(ErrorCode::BadInput, "unknown task: " + task_id);
  json arr;
  try {
    arr = json::parse(corpus_json);
    if (!arr.is_array())
      throw Error(ErrorCode::BadInput, "corpus is not a JSON array");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("corpus JSON: ") + e.what());
  }
  if (task_id == "egraph") {
    std::vector<EGraph> items;
    for (const auto& j : arr) items.push_back(egraph_from_json(j.dump()));
    return make_egraph_task(std::move(items));
  }
  if (task_id == "shard") {
    std::vector<ShardProblem> items;
    for (const auto& j : arr) items.push_back(shard_from_json(j.dump()));
    return make_shard_task(std::move(items));
  }
  std::vector<Program> items;
  for (const auto& j : arr) items.push_back(program_from_json(j.dump()));
  return make_inline_task(std::move(items), task_id == "inline-size"
                                                ? InlineMetric::Size
                                                : InlineMetric::Perf);
}

PolicyTemplate naive_seed_for_task(const std::string& task_id) {
  if (task_id == "egraph") return egraph_baseline_priority();
  if (task_id == "shard") return shard_baseline_scoring();
  if (known_task(task_id)) return never_inline_template();
  throw Error(ErrorCode::BadInput, "unknown task: " + task_id);
}

} // namespace hew
