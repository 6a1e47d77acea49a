#include "hew/features.hpp"

#include <algorithm>

namespace hew {

const FeatureCatalog& inline_feature_catalog() {
  static const FeatureCatalog cat = [] {
    FeatureCatalog c;
    c.name = "inline";
    c.version = 1;
    using T = ExprType;
    c.entries = {
        {"callee_raw_count", T::Int},
        {"callee_weighted_size", T::Int},
        {"callee_perf_cost", T::Int},
        {"callee_block_count", T::Int},
        {"callee_users", T::Int},
        {"caller_users", T::Int},
        {"caller_size", T::Int},
        {"loop_depth", T::Int},
        {"site_frequency", T::Int},
        {"entry_frequency", T::Int},
        {"num_constant_args", T::Int},
        {"num_undef_args", T::Int},
        {"num_exact_type_matches", T::Int},
        {"num_noop_ptr_casts", T::Int},
        {"num_nontrivial_casts", T::Int},
        {"is_recursive", T::Bool},
        {"callee_has_vector", T::Bool},
        {"no_inline", T::Bool},
        {"always_inline", T::Bool},
        {"optimize_for_size", T::Bool},
        {"min_size", T::Bool},
        {"hot", T::Bool},
        {"is_declaration", T::Bool},
        {"is_optimized_libfunc", T::Bool},
        {"mem_none", T::Bool},
        {"mem_readonly", T::Bool},
        {"arg_delta_min_prefix", T::Int},
        {"callee_call_cost_units", T::Int},
    };
    return c;
  }();
  return cat;
}

FeatureVector compute_features(const Program& p, const CallSite& cs) {
  FeatureVector v(static_cast<int>(InlineFeature::Count_), 0);
  auto set = [&](InlineFeature f, int64_t x) { v[static_cast<int>(f)] = x; };

  const Function& caller = p.function(cs.caller);
  const BasicBlock& block = caller.blocks.at(cs.block);

  set(InlineFeature::CallerUsers, user_count(p, caller));
  set(InlineFeature::CallerSize, instruction_count(caller));
  set(InlineFeature::LoopDepth, block.loop_depth);
  set(InlineFeature::SiteFrequency, block.frequency);
  set(InlineFeature::EntryFrequency, caller.entry_frequency);

  int64_t n_const = 0, n_undef = 0;
  for (auto& a : cs.args) {
    if (a.kind == ArgKind::Constant) ++n_const;
    else if (a.kind == ArgKind::Undef) ++n_undef;
  }
  set(InlineFeature::NumConstantArgs, n_const);
  set(InlineFeature::NumUndefArgs, n_undef);

  const Function* callee =
      cs.callee ? &p.function(*cs.callee) : nullptr;
  if (!callee || callee->attrs.is_declaration) {
    // Indirect or bodyless callee: callee-derived features default to 0.
    set(InlineFeature::IsDeclaration, 1);
    return v;
  }

  set(InlineFeature::CalleeRawCount, instruction_count(*callee));
  set(InlineFeature::CalleeWeightedSize, weighted_size_cost(*callee));
  PerfCost pc = perf_cost(*callee, kFeaturePerfCostPenalty);
  set(InlineFeature::CalleePerfCost, pc.cost);
  set(InlineFeature::CalleeHasVector, pc.has_vector ? 1 : 0);
  set(InlineFeature::CalleeBlockCount, static_cast<int64_t>(callee->blocks.size()));
  // Call-penalty multiplier units: each direct call 1, each indirect call 2,
  // so perf cost = (non-call part) + penalty * units for any penalty.
  int64_t ccu = 0;
  for (auto& bb : callee->blocks)
    for (auto& ins : bb.instructions)
      if (is_call(ins.opcode)) ccu += ins.indirect ? 2 : 1;
  set(InlineFeature::CalleeCallCostUnits, ccu);
  set(InlineFeature::CalleeUsers, user_count(p, *callee));
  set(InlineFeature::IsRecursive, callee->id == caller.id ? 1 : 0);
  set(InlineFeature::NoInline, callee->attrs.no_inline);
  set(InlineFeature::AlwaysInline, callee->attrs.always_inline);
  set(InlineFeature::OptimizeForSize, callee->attrs.optimize_for_size);
  set(InlineFeature::MinSize, callee->attrs.min_size);
  set(InlineFeature::Hot, callee->attrs.hot);
  set(InlineFeature::IsOptimizedLibfunc, callee->attrs.is_optimized_libfunc);
  set(InlineFeature::MemNone, callee->mem == MemoryEffect::None);
  set(InlineFeature::MemReadonly, callee->mem == MemoryEffect::ReadOnly);

  // Per-argument type matching, plus the running-minimum of the size policy's
  // per-argument threshold deltas. The delta sequence interleaves bonuses with
  // zero-clamped penalties, so the final threshold depends on the minimum the
  // running total reaches at the penalty steps; that single integer makes the
  // order-sensitive computation expressible in the loop-free DSL.
  int64_t n_exact = 0, n_noop = 0, n_nontrivial = 0;
  int64_t running = 0, min_prefix = 0;
  size_t nparams = callee->params.size();
  for (size_t i = 0; i < cs.args.size(); ++i) {
    const ArgValue& a = cs.args[i];
    if (a.kind == ArgKind::Constant) running += 10;
    else if (a.kind == ArgKind::Undef) running += 5;
    if (i < nparams) {
      switch (cast_class(a.type_tag, callee->params[i])) {
      case CastClass::Exact:
        ++n_exact;
        running += 7;
        break;
      case CastClass::NoopPtrIntCast:
        ++n_noop;
        running += 3;
        break;
      case CastClass::NontrivialCast:
        ++n_nontrivial;
        running -= 5;
        min_prefix = std::min(min_prefix, running);
        break;
      case CastClass::OtherMismatchNoop:
        break;
      }
    }
  }
  set(InlineFeature::NumExactTypeMatches, n_exact);
  set(InlineFeature::NumNoopPtrCasts, n_noop);
  set(InlineFeature::NumNontrivialCasts, n_nontrivial);
  set(InlineFeature::ArgDeltaMinPrefix, min_prefix);
  return v;
}

} // namespace hew
