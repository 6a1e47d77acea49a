#pragma once

#include "hew/dsl.hpp"
#include "hew/mini_ir.hpp"

namespace hew {

// Feature catalog for the inlining tasks. Indices are stable within a catalog
// version; templates reference features by name.
enum class InlineFeature : int {
  CalleeRawCount = 0,
  CalleeWeightedSize,
  CalleePerfCost,
  CalleeBlockCount,
  CalleeUsers,
  CallerUsers,
  CallerSize,
  LoopDepth,
  SiteFrequency,
  EntryFrequency,
  NumConstantArgs,
  NumUndefArgs,
  NumExactTypeMatches,
  NumNoopPtrCasts,
  NumNontrivialCasts,
  IsRecursive,
  CalleeHasVector,
  NoInline,
  AlwaysInline,
  OptimizeForSize,
  MinSize,
  Hot,
  IsDeclaration,
  IsOptimizedLibfunc,
  MemNone,
  MemReadonly,
  ArgDeltaMinPrefix,
  CalleeCallCostUnits,
  Count_,
};

/// Call penalty baked into the callee_perf_cost feature. Features must be a
/// pure function of (Program, CallSite), so the penalty cannot stay symbolic;
/// this constant matches the tuned performance-policy preset.
constexpr int64_t kFeaturePerfCostPenalty = 13;

const FeatureCatalog& inline_feature_catalog();

FeatureVector compute_features(const Program& p, const CallSite& cs);

inline int64_t feature(const FeatureVector& v, InlineFeature f) {
  return v[static_cast<int>(f)];
}

} // namespace hew
