#include "hew/reference_policies.hpp"

#include <algorithm>

#include "hew/features.hpp"

namespace hew {

const std::vector<PerfPolicyParams::Bound>& PerfPolicyParams::bounds() {
  static const std::vector<Bound> b = {
      {"ae-inline-base-threshold", 10, 200, &PerfPolicyParams::base_threshold},
      {"ae-inline-call-penalty", 5, 50, &PerfPolicyParams::call_penalty},
      {"ae-inline-const-arg-bonus", 0, 100, &PerfPolicyParams::const_arg_bonus},
      {"ae-inline-loop-bonus", 0, 100, &PerfPolicyParams::loop_bonus},
      {"ae-inline-vector-bonus", 0, 100, &PerfPolicyParams::vector_bonus},
      {"ae-inline-hotness-mul", 1, 10, &PerfPolicyParams::hotness_multiplier},
      {"ae-inline-hotness-shift", 0, 15, &PerfPolicyParams::hotness_shift},
      {"ae-inline-recursion-penalty", 0, 100, &PerfPolicyParams::recursion_penalty},
      {"ae-inline-large-caller-threshold", 1000, 10000,
       &PerfPolicyParams::large_caller_threshold},
      {"ae-inline-large-caller-reduction", 0, 90,
       &PerfPolicyParams::large_caller_reduction},
  };
  return b;
}

SlotAssignment PerfPolicyParams::as_assignment() const {
  SlotAssignment out;
  for (auto& b : bounds()) out[b.name] = this->*b.field;
  return out;
}

PerfPolicyParams PerfPolicyParams::from_assignment(const SlotAssignment& slots) {
  PerfPolicyParams p;
  for (auto& b : bounds()) {
    auto it = slots.find(b.name);
    if (it == slots.end()) throw Error(ErrorCode::SlotMissing, b.name);
    if (it->second < b.lo || it->second > b.hi)
      throw Error(ErrorCode::SlotOutOfBounds, b.name);
    p.*b.field = it->second;
  }
  return p;
}

bool size_policy_decide(const Program& p, const CallSite& cs,
                        const SizePolicyConstants& c) {
  if (cs.is_indirect()) return false;
  const Function& callee = p.function(*cs.callee);
  if (callee.attrs.is_declaration) return false;
  if (callee.attrs.no_inline) return false;
  if (callee.attrs.always_inline) return true;

  int64_t raw = instruction_count(callee);
  int64_t weighted = weighted_size_cost(callee);

  if (raw < c.tiny_function_threshold) return true;

  bool one_use = user_count(p, callee) == 1;
  if ((one_use && raw < c.aggressive_special_case_threshold) ||
      (callee.mem == MemoryEffect::None &&
       weighted < c.aggressive_special_case_threshold) ||
      (only_reads_memory(callee.mem) && weighted < c.aggressive_readonly_threshold))
    return true;

  int64_t threshold = c.small_function_threshold;
  if (callee.attrs.optimize_for_size || callee.attrs.min_size) {
    threshold = std::max<int64_t>(0, threshold - c.conservative_inline_penalty);
  } else if (callee.attrs.hot) {
    threshold += c.hot_function_bonus;
  }
  if (one_use) threshold += c.single_use_inline_bonus;
  if (static_cast<int64_t>(callee.blocks.size()) > c.many_basic_blocks_threshold)
    threshold = std::max<int64_t>(0, threshold - c.basic_block_penalty);

  size_t nparams = callee.params.size();
  for (size_t i = 0; i < cs.args.size(); ++i) {
    const ArgValue& arg = cs.args[i];
    if (arg.kind == ArgKind::Constant) threshold += c.constant_arg_bonus;
    else if (arg.kind == ArgKind::Undef) threshold += c.undef_arg_bonus;
    if (i < nparams) {
      switch (cast_class(arg.type_tag, callee.params[i])) {
      case CastClass::Exact:
        threshold += c.exact_type_match_bonus;
        break;
      case CastClass::NoopPtrIntCast:
        threshold += c.pointer_castable_bonus;
        break;
      case CastClass::NontrivialCast:
        threshold = std::max<int64_t>(0, threshold - c.nontrivial_cast_penalty);
        break;
      case CastClass::OtherMismatchNoop:
        break;
      }
    }
  }
  return weighted < threshold;
}

bool perf_policy_decide(const Program& p, const CallSite& cs,
                        const PerfPolicyParams& params) {
  if (cs.is_indirect()) return false;
  const Function& caller = p.function(cs.caller);
  const Function& callee = p.function(*cs.callee);
  if (callee.attrs.is_declaration) return false;
  // Mandatory-never cases handled by the advisor wrapper before the evolved
  // cost model runs.
  if (callee.attrs.no_inline || callee.id == caller.id) return false;
  if (callee.attrs.always_inline) return true;
  if (callee.attrs.is_optimized_libfunc) return true;

  PerfCost pc = perf_cost(callee, params.call_penalty);

  int64_t threshold = params.base_threshold;
  for (auto& arg : cs.args)
    if (arg.kind == ArgKind::Constant) threshold += params.const_arg_bonus;

  int64_t depth = caller.blocks.at(cs.block).loop_depth;
  if (depth > 0) threshold += params.loop_bonus * std::min<int64_t>(depth, 3);

  if (pc.has_vector) threshold += params.vector_bonus;

  int64_t entry_freq = caller.entry_frequency;
  if (entry_freq > 0) {
    int64_t site_freq = caller.blocks.at(cs.block).frequency;
    if (site_freq > (entry_freq >> std::clamp<int64_t>(params.hotness_shift, 0, 63)))
      threshold *= params.hotness_multiplier;
  }

  // Dead under the wrapper's recursion check; kept to mirror the reference
  // decision order.
  if (callee.id == caller.id) threshold -= params.recursion_penalty;

  int64_t caller_size = 0;
  for (auto& bb : caller.blocks) {
    caller_size += static_cast<int64_t>(bb.instructions.size());
    if (caller_size > params.large_caller_threshold) break;
  }
  if (caller_size > params.large_caller_threshold)
    threshold = threshold * (100 - params.large_caller_reduction) / 100;

  return pc.cost < threshold;
}

namespace {

using E = Expr;

Expr feat(InlineFeature f) {
  return E::feat(inline_feature_catalog().entries[static_cast<int>(f)].name);
}

PolicyTemplate size_a_template() {
  // Threshold entering the argument loop.
  Expr t0 = E::iff(
      E::bin(ExprOp::Or, feat(InlineFeature::OptimizeForSize), feat(InlineFeature::MinSize)),
      E::intc(5), E::iff(feat(InlineFeature::Hot), E::intc(75), E::intc(25)));
  Expr one_use = E::bin(ExprOp::Eq, feat(InlineFeature::CalleeUsers), E::intc(1));
  Expr t1 = E::bin(ExprOp::Add, std::move(t0), E::iff(one_use, E::intc(80), E::intc(0)));
  Expr t2 = E::iff(E::bin(ExprOp::Lt, E::intc(5), feat(InlineFeature::CalleeBlockCount)),
                   E::bin(ExprOp::Sub, t1, E::intc(5)), t1);
  // Net per-argument threshold delta, and the interleaved loop's closed form:
  // final = max(t2 + delta, delta - min_prefix).
  Expr bonuses = E::bin(
      ExprOp::Add,
      E::bin(ExprOp::Add,
             E::bin(ExprOp::Mul, E::intc(10), feat(InlineFeature::NumConstantArgs)),
             E::bin(ExprOp::Mul, E::intc(5), feat(InlineFeature::NumUndefArgs))),
      E::bin(ExprOp::Add,
             E::bin(ExprOp::Mul, E::intc(7), feat(InlineFeature::NumExactTypeMatches)),
             E::bin(ExprOp::Mul, E::intc(3), feat(InlineFeature::NumNoopPtrCasts))));
  Expr delta = E::bin(
      ExprOp::Add, std::move(bonuses),
      E::un(ExprOp::Neg,
            E::bin(ExprOp::Mul, E::intc(5), feat(InlineFeature::NumNontrivialCasts))));
  Expr threshold =
      E::bin(ExprOp::Max, E::bin(ExprOp::Add, std::move(t2), delta),
             E::bin(ExprOp::Add, delta,
                    E::un(ExprOp::Neg, feat(InlineFeature::ArgDeltaMinPrefix))));
  Expr heuristic =
      E::bin(ExprOp::Lt, feat(InlineFeature::CalleeWeightedSize), std::move(threshold));

  Expr one_use2 = E::bin(ExprOp::Eq, feat(InlineFeature::CalleeUsers), E::intc(1));
  Expr reads_only = E::bin(ExprOp::Or, feat(InlineFeature::MemNone),
                           feat(InlineFeature::MemReadonly));
  Expr aggressive = E::bin(
      ExprOp::Or,
      E::bin(ExprOp::And, std::move(one_use2),
             E::bin(ExprOp::Lt, feat(InlineFeature::CalleeRawCount), E::intc(150))),
      E::bin(ExprOp::Or,
             E::bin(ExprOp::And, feat(InlineFeature::MemNone),
                    E::bin(ExprOp::Lt, feat(InlineFeature::CalleeWeightedSize),
                           E::intc(150))),
             E::bin(ExprOp::And, std::move(reads_only),
                    E::bin(ExprOp::Lt, feat(InlineFeature::CalleeWeightedSize),
                           E::intc(75)))));

  Expr body = E::iff(
      E::bin(ExprOp::Lt, feat(InlineFeature::CalleeRawCount), E::intc(10)),
      E::truec(),
      E::iff(std::move(aggressive), E::truec(), std::move(heuristic)));

  PolicyTemplate t;
  t.root = E::iff(
      feat(InlineFeature::IsDeclaration), E::falsec(),
      E::iff(feat(InlineFeature::NoInline), E::falsec(),
             E::iff(feat(InlineFeature::AlwaysInline), E::truec(), std::move(body))));
  return t;
}

PolicyTemplate perf_b_template() {
  PolicyTemplate t;
  PerfPolicyParams defaults;
  for (auto& b : PerfPolicyParams::bounds())
    t.slots.push_back({b.name, b.lo, b.hi, defaults.*b.field});

  auto slot = [](const char* n) { return E::param(n); };

  // The callee_perf_cost feature bakes in the tuned call penalty; rebuild the
  // cost for the actual slot value via the call-cost units.
  Expr cost = E::bin(
      ExprOp::Add, feat(InlineFeature::CalleePerfCost),
      E::bin(ExprOp::Mul,
             E::bin(ExprOp::Add, slot("ae-inline-call-penalty"),
                    E::un(ExprOp::Neg, E::intc(kFeaturePerfCostPenalty))),
             feat(InlineFeature::CalleeCallCostUnits)));

  Expr threshold = E::bin(
      ExprOp::Add, slot("ae-inline-base-threshold"),
      E::bin(ExprOp::Mul, slot("ae-inline-const-arg-bonus"),
             feat(InlineFeature::NumConstantArgs)));
  threshold = E::bin(
      ExprOp::Add, std::move(threshold),
      E::bin(ExprOp::Mul, slot("ae-inline-loop-bonus"),
             E::bin(ExprOp::Min, feat(InlineFeature::LoopDepth), E::intc(3))));
  threshold = E::bin(ExprOp::Add, std::move(threshold),
                     E::iff(feat(InlineFeature::CalleeHasVector),
                            slot("ae-inline-vector-bonus"), E::intc(0)));
  threshold = E::iff(
      E::bin(ExprOp::Lt,
             E::bin(ExprOp::Shr, feat(InlineFeature::EntryFrequency),
                    slot("ae-inline-hotness-shift")),
             feat(InlineFeature::SiteFrequency)),
      E::bin(ExprOp::Mul, threshold, slot("ae-inline-hotness-mul")), threshold);
  // Dead under the wrapper's recursion check; mirrors the reference order.
  threshold = E::bin(
      ExprOp::Add, std::move(threshold),
      E::un(ExprOp::Neg,
            E::bin(ExprOp::Mul, slot("ae-inline-recursion-penalty"),
                   E::iff(feat(InlineFeature::IsRecursive), E::intc(1), E::intc(0)))));
  threshold = E::iff(
      E::bin(ExprOp::Lt, slot("ae-inline-large-caller-threshold"),
             feat(InlineFeature::CallerSize)),
      E::bin(ExprOp::Div,
             E::bin(ExprOp::Mul, threshold,
                    E::bin(ExprOp::Add, E::intc(100),
                           E::un(ExprOp::Neg, slot("ae-inline-large-caller-reduction")))),
             E::intc(100)),
      threshold);

  Expr core = E::bin(ExprOp::Lt, std::move(cost), std::move(threshold));

  t.root = E::iff(
      feat(InlineFeature::IsDeclaration), E::falsec(),
      E::iff(E::bin(ExprOp::Or, feat(InlineFeature::NoInline),
                    feat(InlineFeature::IsRecursive)),
             E::falsec(),
             E::iff(feat(InlineFeature::AlwaysInline), E::truec(),
                    E::iff(feat(InlineFeature::IsOptimizedLibfunc), E::truec(),
                           std::move(core)))));
  return t;
}

} // namespace

PolicyTemplate as_template(ReferencePolicy which) {
  PolicyTemplate t =
      which == ReferencePolicy::SizeA ? size_a_template() : perf_b_template();
  t.meta.proposer = "seed";
  return t;
}

PolicyTemplate never_inline_template() {
  PolicyTemplate t;
  t.root = Expr::falsec();
  t.meta.proposer = "seed";
  return t;
}

PolicyTemplate always_inline_template() {
  PolicyTemplate t;
  t.root = Expr::truec();
  t.meta.proposer = "seed";
  return t;
}

} // namespace hew
