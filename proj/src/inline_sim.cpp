#include "hew/inline_sim.hpp"

#include <algorithm>
#include <deque>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

bool is_legal(const Program& p, const CallSite& cs) {
  if (cs.is_indirect()) return false;
  const Function& callee = p.function(*cs.callee);
  if (callee.attrs.is_declaration) return false;
  if (callee.attrs.no_inline) return false;
  if (cs.caller == *cs.callee) return false;
  return true;
}

Program apply_inline(const Program& p, const CallSite& cs) {
  Program out = p;
  apply_inline_inplace(out, cs.id);
  return out;
}

std::vector<std::string> apply_inline_inplace(Program& out,
                                              const std::string& cs_id) {
  const CallSite cs = out.callsite(cs_id); // copy: the entry is erased below
  if (!is_legal(out, cs))
    throw Error(ErrorCode::IllegalInline, cs.id);

  const std::string callee_id = *cs.callee;
  const Function& callee = out.functions.at(callee_id);
  Function& caller = out.functions.at(cs.caller);
  BasicBlock& site_block = caller.blocks.at(cs.block);
  const int64_t site_freq = site_block.frequency;
  const int site_depth = site_block.loop_depth;

  // (a) remove the call instruction from the caller block.
  auto call_it = std::find_if(
      site_block.instructions.begin(), site_block.instructions.end(),
      [&](const Instruction& ins) { return ins.callsite_id == cs.id; });
  if (call_it == site_block.instructions.end())
    throw Error(ErrorCode::Internal, "callsite not anchored: " + cs.id);
  site_block.instructions.erase(call_it);

  // (b) copy the callee body minus its ret instructions, rescaling block
  // metadata to the call site. Blocks left empty by ret removal are dropped.
  std::vector<BasicBlock> copied;
  std::vector<int> new_index(callee.blocks.size(), -1);
  for (size_t b = 0; b < callee.blocks.size(); ++b) {
    BasicBlock bb = callee.blocks[b];
    std::erase_if(bb.instructions,
                  [](const Instruction& ins) { return ins.opcode == Opcode::Ret; });
    if (bb.instructions.empty()) continue;
    bb.loop_depth += site_depth;
    int64_t scaled = static_cast<int64_t>(
        static_cast<__int128>(bb.frequency) * site_freq / callee.entry_frequency);
    bb.frequency = std::max<int64_t>(1, scaled);
    new_index[b] = static_cast<int>(copied.size());
    copied.push_back(std::move(bb));
  }
  const int insert_at = cs.block + 1;
  // Copied blocks displace everything after the call block by a fixed offset.
  for (auto& [id, other] : out.callsites)
    if (other.caller == cs.caller && other.block >= insert_at)
      other.block += static_cast<int>(copied.size());
  caller.blocks.insert(caller.blocks.begin() + insert_at, copied.begin(),
                       copied.end());

  // (c) the copied body's callsites become fresh callsites of the caller.
  std::vector<std::pair<std::string, CallSite>> fresh;
  for (const auto& [inner_id, inner] : out.callsites) {
    if (inner.caller != callee_id) continue;
    CallSite nc = inner;
    nc.id = inner_id + "@" + cs.id;
    nc.caller = cs.caller;
    nc.block = insert_at + new_index.at(inner.block);
    fresh.emplace_back(inner_id, std::move(nc));
  }
  for (auto& [inner_id, nc] : fresh) {
    for (auto& ins : caller.blocks.at(nc.block).instructions)
      if (ins.callsite_id == inner_id) ins.callsite_id = nc.id;
    out.callsites.emplace(nc.id, nc);
  }

  caller.inlined_constant_args +=
      std::count_if(cs.args.begin(), cs.args.end(),
                    [](const ArgValue& a) { return a.kind == ArgKind::Constant; });
  out.callsites.erase(cs.id);

  std::vector<std::string> fresh_ids;
  for (auto& [inner_id, nc] : fresh) fresh_ids.push_back(nc.id);

  // (d) a callee that just lost its last user disappears entirely.
  if (user_count(out, out.functions.at(callee_id)) == 0 &&
      !callee.attrs.externally_visible && !out.roots.count(callee_id)) {
    std::erase_if(out.callsites,
                  [&](const auto& kv) { return kv.second.caller == callee_id; });
    out.functions.erase(callee_id);
  }
  return fresh_ids;
}

int64_t binary_size(const Program& p, const SizeModelParams& m) {
  // Reachability over direct calls from the roots.
  std::set<std::string> reachable(p.roots.begin(), p.roots.end());
  std::deque<std::string> queue(p.roots.begin(), p.roots.end());
  while (!queue.empty()) {
    std::string id = queue.front();
    queue.pop_front();
    for (const auto& [cid, cs] : p.callsites)
      if (cs.caller == id && cs.callee && reachable.insert(*cs.callee).second)
        queue.push_back(*cs.callee);
  }
  int64_t total = 0;
  for (const auto& [id, f] : p.functions) {
    if (f.attrs.is_declaration || !reachable.count(id)) continue;
    int64_t body = weighted_size_cost(f) -
                   m.const_arg_simplification_credit * f.inlined_constant_args;
    total += m.per_function_overhead + std::max<int64_t>(0, body);
  }
  return total;
}

int64_t perf_proxy(const Program& p, const PerfModelParams& m) {
  int64_t total = 0;
  for (const auto& [id, cs] : p.callsites)
    total += m.call_overhead_weight *
             p.function(cs.caller).blocks.at(cs.block).frequency;
  int64_t size = binary_size(p, SizeModelParams{});
  total += m.icache_penalty_per_unit * std::max<int64_t>(0, size - m.icache_budget);
  return total;
}

namespace {

// Callee-first post-order over the initial call graph, ties broken by
// function id, then by callsite id within each function.
std::vector<std::string> initial_worklist(const Program& p) {
  std::map<std::string, std::vector<const CallSite*>> by_caller;
  for (const auto& [id, cs] : p.callsites)
    by_caller[cs.caller].push_back(&cs); // map order = callsite id order
  std::vector<std::string> fn_order;
  std::set<std::string> visited;
  auto dfs = [&](auto&& self, const std::string& id) -> void {
    if (!visited.insert(id).second) return;
    auto it = by_caller.find(id);
    if (it != by_caller.end())
      for (const CallSite* cs : it->second)
        if (cs->callee) self(self, *cs->callee);
    fn_order.push_back(id);
  };
  for (const auto& [id, f] : p.functions) dfs(dfs, id);

  std::vector<std::string> work;
  for (const std::string& fid : fn_order) {
    auto it = by_caller.find(fid);
    if (it != by_caller.end())
      for (const CallSite* cs : it->second) work.push_back(cs->id);
  }
  return work;
}

struct WorklistRun {
  Program program;
  InlineTrace trace;
  int64_t applied = 0;
  bool budget_hit = false;
};

int64_t total_instructions(const Program& p) {
  int64_t n = 0;
  for (const auto& [id, f] : p.functions)
    if (!f.attrs.is_declaration) n += instruction_count(f);
  return n;
}

WorklistRun run_worklist(const Program& p, const DecisionFn& policy,
                         int64_t budget, int64_t max_instructions) {
  WorklistRun r{p, {}, 0, false};
  std::deque<std::string> work;
  for (auto& id : initial_worklist(p)) work.push_back(id);
  std::set<std::string> seen(work.begin(), work.end());

  while (!work.empty()) {
    std::string id = work.front();
    work.pop_front();
    auto it = r.program.callsites.find(id);
    if (it == r.program.callsites.end()) continue; // vanished with its caller
    const CallSite& cs = it->second;

    InlineDecision d;
    d.callsite = id;
    d.legal = is_legal(r.program, cs);
    d.mandatory = d.legal && r.program.function(*cs.callee).attrs.always_inline;
    if (d.mandatory) {
      d.recommended = true;
    } else if (d.legal) {
      try {
        d.recommended = policy(r.program, cs);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::PolicyEvaluationFailure, e.what());
      }
    }
    if (d.legal && d.recommended) {
      if (r.applied >= budget ||
          total_instructions(r.program) > max_instructions) {
        r.budget_hit = true;
      } else {
        // Newly created callsites join the worklist FIFO, once each.
        for (const auto& nid : apply_inline_inplace(r.program, id))
          if (seen.insert(nid).second) work.push_back(nid);
        d.applied = true;
        ++r.applied;
      }
    }
    r.trace.push_back(d);
  }
  return r;
}

} // namespace

RunPolicyResult run_policy(const Program& p, const DecisionFn& policy,
                           const RunPolicyOptions& opts) {
  const int64_t budget =
      opts.budget_factor * static_cast<int64_t>(p.callsites.size());
  PerfModelParams perf = opts.perf_model;
  if (opts.metric == InlineMetric::Perf && perf.icache_budget == 0) {
    int64_t initial = binary_size(p, SizeModelParams{});
    perf.icache_budget = initial + initial / 4;
  }
  auto measure = [&](const Program& q) {
    return opts.metric == InlineMetric::Size ? binary_size(q, opts.size_model)
                                             : perf_proxy(q, perf);
  };

  const int64_t max_instructions =
      opts.growth_factor * std::max<int64_t>(1, total_instructions(p));
  auto never = [](const Program&, const CallSite&) { return false; };
  WorklistRun baseline = run_worklist(p, never, budget, max_instructions);
  WorklistRun run = run_worklist(p, policy, budget, max_instructions);

  RunPolicyResult res;
  res.baseline_metric = measure(baseline.program);
  res.metric = measure(run.program);
  res.reward = res.baseline_metric == 0
                   ? 0.0
                   : 100.0 * static_cast<double>(res.baseline_metric - res.metric) /
                         static_cast<double>(res.baseline_metric);
  res.program = std::move(run.program);
  res.trace = std::move(run.trace);
  res.applied_count = run.applied;
  res.budget_hit = run.budget_hit;
  return res;
}

std::string trace_to_jsonl(const InlineTrace& trace) {
  std::string out;
  for (const auto& d : trace) {
    json j{{"callsite", d.callsite},
           {"legal", d.legal},
           {"recommended", d.recommended},
           {"applied", d.applied},
           {"mandatory", d.mandatory}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string reward_report_json(const RunPolicyResult& r) {
  json j{{"reward", r.reward},
         {"baseline_metric", r.baseline_metric},
         {"metric", r.metric},
         {"applied_count", r.applied_count},
         {"budget_hit", r.budget_hit}};
  return j.dump(2) + "\n";
}

} // namespace hew
