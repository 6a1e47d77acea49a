#pragma once

#include "hew/dsl.hpp"
#include "hew/mini_ir.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// The two reference inlining policies, reimplemented decision-for-decision,
// plus their DSL renditions used as evolution seeds and regression anchors.
// ---------------------------------------------------------------------------

struct SizePolicyConstants {
  int64_t tiny_function_threshold = 10;
  int64_t small_function_threshold = 25;
  int64_t single_use_inline_bonus = 80;
  int64_t many_basic_blocks_threshold = 5;
  int64_t basic_block_penalty = 5;
  int64_t conservative_inline_penalty = 20;
  int64_t hot_function_bonus = 50;
  int64_t aggressive_special_case_threshold = 150;
  int64_t aggressive_readonly_threshold = 75;
  int64_t weight_high = 3;
  int64_t weight_medium = 2;
  int64_t weight_low = 1;
  int64_t constant_arg_bonus = 10;
  int64_t undef_arg_bonus = 5;
  int64_t exact_type_match_bonus = 7;
  int64_t pointer_castable_bonus = 3;
  int64_t nontrivial_cast_penalty = 5;

  /// The canonical constant set; no overrides.
  static SizePolicyConstants verbatim() { return {}; }
};

struct PerfPolicyParams {
  int64_t base_threshold = 60;
  int64_t call_penalty = 15;
  int64_t const_arg_bonus = 40;
  int64_t loop_bonus = 40;
  int64_t vector_bonus = 30;
  int64_t hotness_multiplier = 3;
  int64_t hotness_shift = 8;
  int64_t recursion_penalty = 50;
  int64_t large_caller_threshold = 4000;
  int64_t large_caller_reduction = 20;

  /// Autotuned preset shipped with the performance policy.
  static PerfPolicyParams tuned() {
    return {200, 13, 68, 12, 97, 10, 3, 22, 9207, 21};
  }

  struct Bound {
    const char* name;
    int64_t lo, hi;
    int64_t PerfPolicyParams::* field;
  };
  static const std::vector<Bound>& bounds();

  SlotAssignment as_assignment() const;
  static PerfPolicyParams from_assignment(const SlotAssignment& slots);
};

bool size_policy_decide(const Program& p, const CallSite& cs,
                        const SizePolicyConstants& c = SizePolicyConstants::verbatim());
bool perf_policy_decide(const Program& p, const CallSite& cs,
                        const PerfPolicyParams& params);

enum class ReferencePolicy { SizeA, PerfB };

/// DSL rendition; PerfB exposes its parameters as hyperparameter slots with
/// the published bounds, SizeA bakes its constants in.
PolicyTemplate as_template(ReferencePolicy which);

PolicyTemplate never_inline_template();
PolicyTemplate always_inline_template();

} // namespace hew
