#include "hew/dsl.hpp"

#include <algorithm>
#include <random>

namespace hew {

namespace {

using Rng = std::mt19937_64;

std::vector<Expr*> collect_nodes(Expr& root) {
  std::vector<Expr*> out;
  std::vector<Expr*> stack{&root};
  while (!stack.empty()) {
    Expr* e = stack.back();
    stack.pop_back();
    out.push_back(e);
    for (auto& k : e->kids) stack.push_back(&k);
  }
  return out;
}

std::vector<const FeatureCatalog::Entry*> features_of_type(const FeatureCatalog& cat,
                                                           ExprType ty) {
  std::vector<const FeatureCatalog::Entry*> out;
  for (auto& e : cat.entries)
    if (e.type == ty) out.push_back(&e);
  return out;
}

int64_t random_const(Rng& rng) {
  static const int64_t pool[] = {0, 1, 2, 3, 4, 5, 8, 10, 16, 25, 32, 50, 64, 100, 128, 200};
  if (rng() % 4 == 0) return static_cast<int64_t>(rng() % 1000);
  return pool[rng() % std::size(pool)];
}

Expr random_expr(ExprType ty, int depth, Rng& rng, const FeatureCatalog& cat,
                 const std::vector<HyperParamSlot>& slots) {
  if (ty == ExprType::Int) {
    if (depth <= 1) {
      switch (rng() % 3) {
      case 0: {
        auto fs = features_of_type(cat, ExprType::Int);
        if (!fs.empty()) return Expr::feat(fs[rng() % fs.size()]->name);
        [[fallthrough]];
      }
      case 1:
        if (!slots.empty() && rng() % 2)
          return Expr::param(slots[rng() % slots.size()].name);
        [[fallthrough]];
      default:
        return Expr::intc(random_const(rng));
      }
    }
    switch (rng() % 6) {
    case 0:
      return Expr::bin(ExprOp::Add, random_expr(ty, depth - 1, rng, cat, slots),
                       random_expr(ty, depth - 1, rng, cat, slots));
    case 1:
      return Expr::bin(ExprOp::Mul, random_expr(ty, depth - 1, rng, cat, slots),
                       Expr::intc(random_const(rng)));
    case 2:
      return Expr::bin(rng() % 2 ? ExprOp::Min : ExprOp::Max,
                       random_expr(ty, depth - 1, rng, cat, slots),
                       random_expr(ty, depth - 1, rng, cat, slots));
    case 3:
      return Expr::iff(random_expr(ExprType::Bool, depth - 1, rng, cat, slots),
                       random_expr(ty, depth - 1, rng, cat, slots),
                       random_expr(ty, depth - 1, rng, cat, slots));
    default:
      return random_expr(ty, 1, rng, cat, slots);
    }
  }
  // Bool: favor feature-vs-threshold comparisons.
  if (depth <= 1) {
    auto fs = features_of_type(cat, ExprType::Bool);
    if (!fs.empty() && rng() % 2) return Expr::feat(fs[rng() % fs.size()]->name);
    return rng() % 2 ? Expr::truec() : Expr::falsec();
  }
  switch (rng() % 8) {
  case 0:
  case 1:
  case 2: {
    static const ExprOp cmps[] = {ExprOp::Lt, ExprOp::Le, ExprOp::Eq};
    ExprOp cmp = cmps[rng() % (rng() % 3 == 0 ? 3 : 2)]; // eq is rarer
    auto fs = features_of_type(cat, ExprType::Int);
    Expr lhs = fs.empty() ? Expr::intc(random_const(rng))
                          : Expr::feat(fs[rng() % fs.size()]->name);
    Expr rhs = (!slots.empty() && rng() % 3 == 0)
                   ? Expr::param(slots[rng() % slots.size()].name)
                   : Expr::intc(random_const(rng));
    return Expr::bin(cmp, std::move(lhs), std::move(rhs));
  }
  case 3:
    return Expr::bin(rng() % 2 ? ExprOp::And : ExprOp::Or,
                     random_expr(ExprType::Bool, depth - 1, rng, cat, slots),
                     random_expr(ExprType::Bool, depth - 1, rng, cat, slots));
  case 4:
    return Expr::un(ExprOp::Not,
                    random_expr(ExprType::Bool, depth - 1, rng, cat, slots));
  case 5:
    return Expr::iff(random_expr(ExprType::Bool, depth - 1, rng, cat, slots),
                     random_expr(ExprType::Bool, depth - 1, rng, cat, slots),
                     random_expr(ExprType::Bool, depth - 1, rng, cat, slots));
  default:
    return random_expr(ExprType::Bool, 1, rng, cat, slots);
  }
}

std::string fresh_slot_name(const PolicyTemplate& t, const std::string& base) {
  for (int i = 0;; ++i) {
    std::string candidate = i == 0 ? base : base + "_" + std::to_string(i);
    if (!t.slot(candidate)) return candidate;
  }
}

void rename_param(Expr& e, const std::string& from, const std::string& to) {
  if (e.op == ExprOp::HyperParam && e.name == from) e.name = to;
  for (auto& k : e.kids) rename_param(k, from, to);
}

bool try_mutate_once(PolicyTemplate& t, const FeatureCatalog& cat, Rng& rng) {
  auto nodes = collect_nodes(t.root);
  Expr* node = nodes[rng() % nodes.size()];
  switch (rng() % 7) {
  case 0: { // point-mutate operator within the same signature
    static const ExprOp arith[] = {ExprOp::Add, ExprOp::Sub, ExprOp::Mul,
                                   ExprOp::Div, ExprOp::Shr, ExprOp::Min,
                                   ExprOp::Max};
    static const ExprOp cmps[] = {ExprOp::Lt, ExprOp::Le, ExprOp::Eq};
    static const ExprOp logic[] = {ExprOp::And, ExprOp::Or};
    auto in = [&](auto& set) {
      return std::find(std::begin(set), std::end(set), node->op) != std::end(set);
    };
    if (in(arith)) node->op = arith[rng() % std::size(arith)];
    else if (in(cmps)) node->op = cmps[rng() % std::size(cmps)];
    else if (in(logic)) node->op = logic[rng() % std::size(logic)];
    else return false;
    return true;
  }
  case 1: { // replace subtree with a fresh well-typed one
    auto ty = expr_type(*node, cat);
    if (!ty) return false;
    *node = random_expr(*ty, 1 + static_cast<int>(rng() % 4), rng, cat, t.slots);
    return true;
  }
  case 2: { // swap feature for another of the same type
    if (node->op != ExprOp::Feature) return false;
    auto idx = cat.index_of(node->name);
    if (!idx) return false;
    auto fs = features_of_type(cat, cat.entries[*idx].type);
    if (fs.size() < 2) return false;
    node->name = fs[rng() % fs.size()]->name;
    return true;
  }
  case 3: { // promote a constant into a fresh hyperparameter slot
    if (node->op != ExprOp::IntConst || node->value < 0) return false;
    int64_t v = node->value;
    HyperParamSlot s;
    s.name = fresh_slot_name(t, "h" + std::to_string(t.slots.size()));
    s.lo = std::max<int64_t>(0, v / 4);
    s.hi = 4 * v + 1;
    s.def = v;
    *node = Expr::param(s.name);
    t.slots.push_back(std::move(s));
    return true;
  }
  case 4: { // perturb a constant
    if (node->op != ExprOp::IntConst) return false;
    int64_t delta = static_cast<int64_t>(rng() % 7) - 3;
    if (rng() % 3 == 0) delta *= 1 + static_cast<int64_t>(rng() % 8);
    if (delta == 0) delta = 1;
    node->value = sat_add(node->value, delta);
    return true;
  }
  case 5: { // delete an If (replace by one branch)
    if (node->op != ExprOp::If) return false;
    Expr branch = node->kids[1 + rng() % 2];
    *node = std::move(branch);
    return true;
  }
  default: { // wrap in an If
    auto ty = expr_type(*node, cat);
    if (!ty) return false;
    Expr cond = random_expr(ExprType::Bool, 3, rng, cat, t.slots);
    Expr other = random_expr(*ty, 3, rng, cat, t.slots);
    Expr self = std::move(*node);
    *node = rng() % 2 ? Expr::iff(std::move(cond), std::move(self), std::move(other))
                      : Expr::iff(std::move(cond), std::move(other), std::move(self));
    return true;
  }
  }
}

} // namespace

MutationResult mutate(const PolicyTemplate& t, const FeatureCatalog& cat,
                      ExprType required_root, uint64_t rng_seed) {
  Rng rng(rng_seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    PolicyTemplate child = t;
    if (!try_mutate_once(child, cat, rng)) continue;
    if (child.root == t.root && child.slots == t.slots) continue;
    if (validate_template(child, cat, required_root).ok)
      return {std::move(child), true};
  }
  return {t, false};
}

PolicyTemplate crossover(const PolicyTemplate& a, const PolicyTemplate& b,
                         const FeatureCatalog& cat, ExprType required_root,
                         uint64_t rng_seed) {
  Rng rng(rng_seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    PolicyTemplate child = a;
    auto nodes = collect_nodes(child.root);
    Expr* target = nodes[rng() % nodes.size()];
    auto want = expr_type(*target, cat);
    if (!want) continue;
    PolicyTemplate donor = b;
    auto donor_nodes = collect_nodes(donor.root);
    std::vector<Expr*> compatible;
    for (auto* n : donor_nodes)
      if (expr_type(*n, cat) == want) compatible.push_back(n);
    if (compatible.empty()) continue;
    Expr graft = *compatible[rng() % compatible.size()];
    // Merge slots referenced by the graft; rename on collision.
    for (auto& s : b.slots) {
      const HyperParamSlot* existing = child.slot(s.name);
      if (existing) {
        if (existing->lo == s.lo && existing->hi == s.hi) continue; // share it
        HyperParamSlot renamed = s;
        renamed.name = fresh_slot_name(child, s.name + "_x");
        rename_param(graft, s.name, renamed.name);
        child.slots.push_back(std::move(renamed));
      } else {
        child.slots.push_back(s);
      }
    }
    *target = std::move(graft);
    if (validate_template(child, cat, required_root).ok) return child;
  }
  return a;
}

} // namespace hew
