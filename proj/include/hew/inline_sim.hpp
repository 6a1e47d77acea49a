#pragma once

#include <functional>

#include "hew/mini_ir.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Legality, the inlining transform, deterministic size/perf metrics, and the
// whole-program policy runner that turns a decision function into a reward.
// ---------------------------------------------------------------------------

struct SizeModelParams {
  int64_t per_function_overhead = 4;
  int64_t call_inst_size = 1;
  int64_t const_arg_simplification_credit = 2;
};

struct PerfModelParams {
  int64_t call_overhead_weight = 2;
  int64_t icache_budget = 0; // run_policy defaults this to 1.25x initial size
  int64_t icache_penalty_per_unit = 3;
};

/// False iff callee is indirect, a declaration, carries no_inline, or the
/// call is directly recursive.
bool is_legal(const Program& p, const CallSite& cs);

/// Splices the callee body (minus its ret instructions) into the caller and
/// deletes the callee when it just lost its last user and is neither a root
/// nor externally visible. Throws IllegalInline.
Program apply_inline(const Program& p, const CallSite& cs);

/// In-place variant used by the policy runner; returns the ids of the fresh
/// callsites copied out of the callee body. `cs_id` must name a callsite of p.
std::vector<std::string> apply_inline_inplace(Program& p, const std::string& cs_id);

/// Sum over defined functions reachable from the roots of
///   overhead + max(0, weighted_size - credit * inlined_constant_args).
int64_t binary_size(const Program& p, const SizeModelParams& m);

/// Call overhead (weight x site frequency over remaining callsites) plus an
/// icache penalty for size above budget. Lower is better.
int64_t perf_proxy(const Program& p, const PerfModelParams& m);

struct InlineDecision {
  std::string callsite;
  bool legal = false;
  bool recommended = false;
  bool applied = false;
  bool mandatory = false; // always_inline
};

using InlineTrace = std::vector<InlineDecision>;

enum class InlineMetric { Size, Perf };

using DecisionFn = std::function<bool(const Program&, const CallSite&)>;

struct RunPolicyResult {
  Program program;
  InlineTrace trace;
  double reward = 0.0;       // percent improvement over the never-inline baseline
  int64_t baseline_metric = 0;
  int64_t metric = 0;
  int64_t applied_count = 0;
  bool budget_hit = false;
};

struct RunPolicyOptions {
  InlineMetric metric = InlineMetric::Size;
  SizeModelParams size_model{};
  PerfModelParams perf_model{}; // icache_budget 0 => 1.25x initial size
  /// Applications allowed per run, as a multiple of the initial callsite count.
  int64_t budget_factor = 8;
  /// Secondary runaway guard: no further applications once the program's total
  /// instruction count exceeds this multiple of the initial count.
  int64_t growth_factor = 64;
};

/// Deterministic worklist run: callee-first post-order over the initial call
/// graph, new callsites appended FIFO, each visited at most once.
/// Throws PolicyEvaluationFailure if the decision function throws.
RunPolicyResult run_policy(const Program& p, const DecisionFn& policy,
                           const RunPolicyOptions& opts = {});

std::string trace_to_jsonl(const InlineTrace& trace);
std::string reward_report_json(const RunPolicyResult& r);

} // namespace hew
