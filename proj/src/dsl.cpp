#include "hew/dsl.hpp"

#include <algorithm>

namespace hew {

const char* expr_op_name(ExprOp op) {
  switch (op) {
  case ExprOp::IntConst: return "int";
  case ExprOp::HyperParam: return "hyperparam";
  case ExprOp::Feature: return "feature";
  case ExprOp::Neg: return "neg";
  case ExprOp::Not: return "not";
  case ExprOp::Add: return "add";
  case ExprOp::Sub: return "sub";
  case ExprOp::Mul: return "mul";
  case ExprOp::Div: return "div";
  case ExprOp::Shr: return "shr";
  case ExprOp::Min: return "min";
  case ExprOp::Max: return "max";
  case ExprOp::Lt: return "lt";
  case ExprOp::Le: return "le";
  case ExprOp::Eq: return "eq";
  case ExprOp::And: return "and";
  case ExprOp::Or: return "or";
  case ExprOp::If: return "if";
  }
  return "?";
}

int expr_node_count(const Expr& e) {
  int n = 1;
  for (auto& k : e.kids) n += expr_node_count(k);
  return n;
}

int expr_depth(const Expr& e) {
  int d = 0;
  for (auto& k : e.kids) d = std::max(d, expr_depth(k));
  return d + 1;
}

const HyperParamSlot* PolicyTemplate::slot(const std::string& name) const {
  for (auto& s : slots)
    if (s.name == name) return &s;
  return nullptr;
}

std::map<std::string, int64_t> PolicyTemplate::default_assignment() const {
  std::map<std::string, int64_t> out;
  for (auto& s : slots) out[s.name] = s.def;
  return out;
}

std::optional<int> FeatureCatalog::index_of(const std::string& feature) const {
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name == feature) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<ExprType> expr_type(const Expr& e, const FeatureCatalog& cat) {
  auto kid = [&](int i) { return expr_type(e.kids[i], cat); };
  auto arity_ok = [&](size_t n) { return e.kids.size() == n; };
  switch (e.op) {
  case ExprOp::IntConst:
  case ExprOp::HyperParam:
    if (!arity_ok(0)) return std::nullopt;
    return ExprType::Int;
  case ExprOp::Feature: {
    if (!arity_ok(0)) return std::nullopt;
    auto idx = cat.index_of(e.name);
    if (!idx) return std::nullopt;
    return cat.entries[*idx].type;
  }
  case ExprOp::Neg:
    if (!arity_ok(1) || kid(0) != ExprType::Int) return std::nullopt;
    return ExprType::Int;
  case ExprOp::Not:
    if (!arity_ok(1) || kid(0) != ExprType::Bool) return std::nullopt;
    return ExprType::Bool;
  case ExprOp::Add:
  case ExprOp::Sub:
  case ExprOp::Mul:
  case ExprOp::Div:
  case ExprOp::Shr:
  case ExprOp::Min:
  case ExprOp::Max:
    if (!arity_ok(2) || kid(0) != ExprType::Int || kid(1) != ExprType::Int)
      return std::nullopt;
    return ExprType::Int;
  case ExprOp::Lt:
  case ExprOp::Le:
  case ExprOp::Eq:
    if (!arity_ok(2) || kid(0) != ExprType::Int || kid(1) != ExprType::Int)
      return std::nullopt;
    return ExprType::Bool;
  case ExprOp::And:
  case ExprOp::Or:
    if (!arity_ok(2) || kid(0) != ExprType::Bool || kid(1) != ExprType::Bool)
      return std::nullopt;
    return ExprType::Bool;
  case ExprOp::If: {
    if (!arity_ok(3) || kid(0) != ExprType::Bool) return std::nullopt;
    auto a = kid(1), b = kid(2);
    if (!a || a != b) return std::nullopt;
    return a;
  }
  }
  return std::nullopt;
}

namespace {

bool slots_declared(const Expr& e, const PolicyTemplate& t, std::string& missing) {
  if (e.op == ExprOp::HyperParam && !t.slot(e.name)) {
    missing = e.name;
    return false;
  }
  for (auto& k : e.kids)
    if (!slots_declared(k, t, missing)) return false;
  return true;
}

} // namespace

ValidationResult validate_template(const PolicyTemplate& t, const FeatureCatalog& cat,
                                   ExprType required_root) {
  if (expr_node_count(t.root) > kMaxExprNodes)
    return {false, "NodeLimit"};
  if (expr_depth(t.root) > kMaxExprDepth)
    return {false, "DepthLimit"};
  std::map<std::string, int> seen;
  for (auto& s : t.slots) {
    if (s.lo > s.hi || s.def < s.lo || s.def > s.hi)
      return {false, "SlotBounds:" + s.name};
    if (seen[s.name]++)
      return {false, "DuplicateSlot:" + s.name};
  }
  std::string missing;
  if (!slots_declared(t.root, t, missing))
    return {false, "UndeclaredSlot:" + missing};
  auto ty = expr_type(t.root, cat);
  if (!ty)
    return {false, "IllTyped"};
  if (*ty != required_root)
    return {false, required_root == ExprType::Bool ? "RootNotBool" : "RootNotInt"};
  return {true, ""};
}

namespace {

struct EvalCtx {
  const FeatureCatalog& cat;
  const SlotAssignment& slots;
  const FeatureVector& features;
};

int64_t eval(const Expr& e, const EvalCtx& ctx) {
  switch (e.op) {
  case ExprOp::IntConst:
    return e.value;
  case ExprOp::HyperParam: {
    auto it = ctx.slots.find(e.name);
    if (it == ctx.slots.end())
      throw Error(ErrorCode::SlotMissing, e.name);
    return it->second;
  }
  case ExprOp::Feature: {
    auto idx = ctx.cat.index_of(e.name);
    if (!idx || *idx >= static_cast<int>(ctx.features.size()))
      throw Error(ErrorCode::MalformedTemplate, "unknown feature " + e.name);
    return ctx.features[*idx];
  }
  case ExprOp::Neg: return sat_neg(eval(e.kids[0], ctx));
  case ExprOp::Not: return eval(e.kids[0], ctx) ? 0 : 1;
  case ExprOp::Add: return sat_add(eval(e.kids[0], ctx), eval(e.kids[1], ctx));
  case ExprOp::Sub: return sub_floor0(eval(e.kids[0], ctx), eval(e.kids[1], ctx));
  case ExprOp::Mul: return sat_mul(eval(e.kids[0], ctx), eval(e.kids[1], ctx));
  case ExprOp::Div: {
    int64_t a = eval(e.kids[0], ctx), b = eval(e.kids[1], ctx);
    if (b == 0) return 0;
    if (a == std::numeric_limits<int64_t>::min() && b == -1)
      return std::numeric_limits<int64_t>::max();
    return a / b;
  }
  case ExprOp::Shr: {
    int64_t a = eval(e.kids[0], ctx), b = eval(e.kids[1], ctx);
    return a >> std::clamp<int64_t>(b, 0, 63);
  }
  case ExprOp::Min: return std::min(eval(e.kids[0], ctx), eval(e.kids[1], ctx));
  case ExprOp::Max: return std::max(eval(e.kids[0], ctx), eval(e.kids[1], ctx));
  case ExprOp::Lt: return eval(e.kids[0], ctx) < eval(e.kids[1], ctx) ? 1 : 0;
  case ExprOp::Le: return eval(e.kids[0], ctx) <= eval(e.kids[1], ctx) ? 1 : 0;
  case ExprOp::Eq: return eval(e.kids[0], ctx) == eval(e.kids[1], ctx) ? 1 : 0;
  case ExprOp::And: return eval(e.kids[0], ctx) && eval(e.kids[1], ctx) ? 1 : 0;
  case ExprOp::Or: return eval(e.kids[0], ctx) || eval(e.kids[1], ctx) ? 1 : 0;
  case ExprOp::If:
    return eval(e.kids[0], ctx) ? eval(e.kids[1], ctx) : eval(e.kids[2], ctx);
  }
  throw Error(ErrorCode::MalformedTemplate, "bad node");
}

void check_slots(const PolicyTemplate& t, const SlotAssignment& slots) {
  for (auto& s : t.slots) {
    auto it = slots.find(s.name);
    if (it == slots.end())
      throw Error(ErrorCode::SlotMissing, s.name);
    if (it->second < s.lo || it->second > s.hi)
      throw Error(ErrorCode::SlotOutOfBounds,
                  s.name + "=" + std::to_string(it->second));
  }
}

} // namespace

int64_t eval_template_int(const PolicyTemplate& t, const FeatureCatalog& cat,
                          const SlotAssignment& slots, const FeatureVector& features) {
  check_slots(t, slots);
  return eval(t.root, EvalCtx{cat, slots, features});
}

bool eval_template_bool(const PolicyTemplate& t, const FeatureCatalog& cat,
                        const SlotAssignment& slots, const FeatureVector& features) {
  return eval_template_int(t, cat, slots, features) != 0;
}

uint64_t template_structure_hash(const PolicyTemplate& t) {
  return fnv1a(print_template(t));
}

} // namespace hew
