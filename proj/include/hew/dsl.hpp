#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hew/common.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Evolvable policy representation: typed integer expression trees over a named
// feature vector, with bounded hyperparameter slots. Arithmetic is 64-bit
// saturating; division and shifts are guarded so no input can crash evaluation.
// ---------------------------------------------------------------------------

enum class ExprType { Int, Bool };

enum class ExprOp {
  IntConst,
  HyperParam,
  Feature,
  Neg, Not,
  Add, Sub, Mul, Div, Shr, Min, Max,
  Lt, Le, Eq, And, Or,
  If,
};

const char* expr_op_name(ExprOp op);

struct Expr {
  ExprOp op = ExprOp::IntConst;
  int64_t value = 0;       // IntConst
  std::string name;        // HyperParam / Feature
  std::vector<Expr> kids;

  bool operator==(const Expr&) const = default;

  static Expr intc(int64_t v) { return {ExprOp::IntConst, v, {}, {}}; }
  static Expr param(std::string n) { return {ExprOp::HyperParam, 0, std::move(n), {}}; }
  static Expr feat(std::string n) { return {ExprOp::Feature, 0, std::move(n), {}}; }
  static Expr un(ExprOp op, Expr a) { return {op, 0, {}, {std::move(a)}}; }
  static Expr bin(ExprOp op, Expr a, Expr b) {
    return {op, 0, {}, {std::move(a), std::move(b)}};
  }
  static Expr iff(Expr c, Expr t, Expr e) {
    return {ExprOp::If, 0, {}, {std::move(c), std::move(t), std::move(e)}};
  }
  // Canonical boolean literals (the grammar has no bool constants).
  static Expr truec() { return bin(ExprOp::Le, intc(0), intc(0)); }
  static Expr falsec() { return bin(ExprOp::Lt, intc(0), intc(0)); }
};

int expr_node_count(const Expr& e);
int expr_depth(const Expr& e);

constexpr int kMaxExprDepth = 24;
constexpr int kMaxExprNodes = 512;

struct HyperParamSlot {
  std::string name;
  int64_t lo = 0;
  int64_t hi = 0;
  int64_t def = 0;

  bool operator==(const HyperParamSlot&) const = default;
};

struct TemplateMeta {
  std::vector<std::string> parent_ids;
  int generation = 0;
  std::string proposer; // "seed" | "mutation" | "crossover" | "external"
};

struct PolicyTemplate {
  Expr root;
  std::vector<HyperParamSlot> slots;
  TemplateMeta meta;

  const HyperParamSlot* slot(const std::string& name) const;
  std::map<std::string, int64_t> default_assignment() const;
};

struct FeatureCatalog {
  struct Entry {
    std::string name;
    ExprType type;
  };
  std::string name;
  int version = 1;
  std::vector<Entry> entries;

  std::optional<int> index_of(const std::string& feature) const;
};

using SlotAssignment = std::map<std::string, int64_t>;
using FeatureVector = std::vector<int64_t>;

/// Static validation: well-typedness against the catalog, declared slots,
/// slot bound sanity, depth and node limits, and the required root type.
struct ValidationResult {
  bool ok = true;
  std::string reason;
};
ValidationResult validate_template(const PolicyTemplate& t, const FeatureCatalog& cat,
                                   ExprType required_root);

/// Computes the expression's type, or nullopt if ill-typed.
std::optional<ExprType> expr_type(const Expr& e, const FeatureCatalog& cat);

/// Total evaluation; throws SlotMissing / SlotOutOfBounds / MalformedTemplate.
int64_t eval_template_int(const PolicyTemplate& t, const FeatureCatalog& cat,
                          const SlotAssignment& slots, const FeatureVector& features);
bool eval_template_bool(const PolicyTemplate& t, const FeatureCatalog& cat,
                        const SlotAssignment& slots, const FeatureVector& features);

// --- Textual form -----------------------------------------------------------

/// Canonical text: `[hyperparam]: <name>, int, <lo>, <hi>[, <default>]` header
/// lines followed by one s-expression. print∘parse is the identity on
/// canonical text.
std::string print_template(const PolicyTemplate& t);
PolicyTemplate parse_template(const std::string& text); // throws SyntaxError

/// Hash of the structural content (canonical text); slot defaults included,
/// metadata excluded.
uint64_t template_structure_hash(const PolicyTemplate& t);

// --- Variation operators ------------------------------------------------

struct MutationResult {
  PolicyTemplate tmpl;
  bool changed = false; // false when 64 attempts produced no valid mutant
};

MutationResult mutate(const PolicyTemplate& t, const FeatureCatalog& cat,
                      ExprType required_root, uint64_t rng_seed);
PolicyTemplate crossover(const PolicyTemplate& a, const PolicyTemplate& b,
                         const FeatureCatalog& cat, ExprType required_root,
                         uint64_t rng_seed);

} // namespace hew
