#include "hew/egraph.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

const EClass& EGraph::eclass(const std::string& id) const {
  for (const auto& c : classes)
    if (c.id == id) return c;
  throw Error(ErrorCode::BadInput, "unknown e-class: " + id);
}

void EGraph::check() const {
  std::set<std::string> ids;
  for (const auto& c : classes) {
    if (!ids.insert(c.id).second)
      throw Error(ErrorCode::BadInput, "duplicate e-class id: " + c.id);
    if (c.nodes.empty())
      throw Error(ErrorCode::BadInput, "empty e-class: " + c.id);
    for (const auto& n : c.nodes)
      if (n.cost < 0)
        throw Error(ErrorCode::BadInput, "negative node cost in " + c.id);
  }
  for (const auto& c : classes)
    for (const auto& n : c.nodes)
      for (const auto& ch : n.children)
        if (!ids.count(ch))
          throw Error(ErrorCode::BadInput, "dangling child class " + ch);
  if (roots.empty())
    throw Error(ErrorCode::BadInput, "e-graph without roots");
  for (const auto& r : roots)
    if (!ids.count(r)) throw Error(ErrorCode::BadInput, "unknown root " + r);
}

namespace {

// Classes reachable from the roots by following chosen nodes only; classes
// missing a choice are recorded and not expanded.
std::set<std::string> choice_reachable(const EGraph& g, const Extraction& x,
                                       std::vector<std::string>* missing) {
  std::set<std::string> seen;
  std::deque<std::string> queue;
  for (const auto& r : g.roots) {
    if (seen.insert(r).second) queue.push_back(r);
  }
  std::set<std::string> visited;
  while (!queue.empty()) {
    std::string id = queue.front();
    queue.pop_front();
    auto it = x.find(id);
    if (it == x.end()) {
      if (missing) missing->push_back(id);
      continue;
    }
    const EClass& c = g.eclass(id);
    if (it->second < 0 || it->second >= static_cast<int>(c.nodes.size())) {
      if (missing) missing->push_back(id);
      continue;
    }
    for (const auto& ch : c.nodes[it->second].children)
      if (seen.insert(ch).second) queue.push_back(ch);
  }
  return seen;
}

} // namespace

ExtractionReport is_valid_extraction(const EGraph& g, const Extraction& x) {
  ExtractionReport rep;
  std::vector<std::string> missing;
  std::set<std::string> reachable = choice_reachable(g, x, &missing);
  for (const auto& id : missing)
    rep.violations.push_back("reachable class without a valid choice: " + id);
  for (const auto& [id, idx] : x)
    if (!reachable.count(id))
      rep.violations.push_back("choice on unreachable class: " + id);

  if (missing.empty()) {
    // Cycle check over the chosen-node graph restricted to reachable classes.
    std::map<std::string, int> color; // 0 white, 1 gray, 2 black
    auto dfs = [&](auto&& self, const std::string& id) -> bool {
      int& c = color[id];
      if (c == 1) {
        rep.violations.push_back("cycle through class: " + id);
        return false;
      }
      if (c == 2) return true;
      c = 1;
      const EClass& cls = g.eclass(id);
      for (const auto& ch : cls.nodes[x.at(id)].children)
        if (!self(self, ch)) return false;
      c = 2;
      return true;
    };
    for (const auto& r : g.roots)
      if (!dfs(dfs, r)) break;
  }
  rep.valid = rep.violations.empty();
  return rep;
}

int64_t extraction_cost(const EGraph& g, const Extraction& x) {
  ExtractionReport rep = is_valid_extraction(g, x);
  if (!rep.valid)
    throw Error(ErrorCode::InvalidExtraction, rep.violations.front());
  int64_t total = 0;
  for (const auto& id : choice_reachable(g, x, nullptr))
    total += g.eclass(id).nodes[x.at(id)].cost;
  return total;
}

const FeatureCatalog& egraph_feature_catalog() {
  static const FeatureCatalog cat = [] {
    FeatureCatalog c;
    c.name = "egraph";
    c.version = 1;
    c.entries = {{"node_cost", ExprType::Int},
                 {"arity", ExprType::Int},
                 {"settled_subtree_cost", ExprType::Int},
                 {"class_size", ExprType::Int}};
    return c;
  }();
  return cat;
}

PolicyTemplate egraph_baseline_priority() {
  PolicyTemplate t;
  t.root = Expr::un(ExprOp::Neg, Expr::feat("node_cost"));
  t.meta.proposer = "seed";
  return t;
}

Extraction greedy_extract(const EGraph& g, const PolicyTemplate& priority,
                          const SlotAssignment& slots) {
  const FeatureCatalog& cat = egraph_feature_catalog();

  struct Settled {
    int node = -1;
    std::set<std::string> reach; // classes in the chosen sub-DAG, incl. self
    int64_t cost = 0;            // DAG cost of that sub-DAG
  };
  std::map<std::string, Settled> settled;

  auto subdag = [&](const ENode& n) {
    std::set<std::string> reach;
    for (const auto& ch : n.children) {
      const Settled& s = settled.at(ch);
      reach.insert(s.reach.begin(), s.reach.end());
    }
    int64_t cost = n.cost;
    for (const auto& id : reach)
      cost += g.eclass(id).nodes[settled.at(id).node].cost;
    return std::pair(std::move(reach), cost);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : g.classes) {
      if (settled.count(c.id)) continue;
      int best = -1;
      int64_t best_priority = 0;
      Settled best_s;
      for (int i = 0; i < static_cast<int>(c.nodes.size()); ++i) {
        const ENode& n = c.nodes[i];
        bool ready = std::all_of(n.children.begin(), n.children.end(),
                                 [&](const std::string& ch) {
                                   return settled.count(ch) != 0;
                                 });
        if (!ready) continue;
        auto [reach, cost] = subdag(n);
        FeatureVector f = {n.cost, static_cast<int64_t>(n.children.size()),
                           cost, static_cast<int64_t>(c.nodes.size())};
        int64_t pr = eval_template_int(priority, cat, slots, f);
        if (best < 0 || pr > best_priority) {
          best = i;
          best_priority = pr;
          best_s.reach = std::move(reach);
          best_s.cost = cost;
        }
      }
      if (best >= 0) {
        best_s.node = best;
        best_s.reach.insert(c.id);
        settled.emplace(c.id, std::move(best_s));
        changed = true;
      }
    }
  }

  for (const auto& r : g.roots)
    if (!settled.count(r))
      throw Error(ErrorCode::NoValidExtraction, "root class unsettled: " + r);

  Extraction x;
  std::deque<std::string> queue(g.roots.begin(), g.roots.end());
  while (!queue.empty()) {
    std::string id = queue.front();
    queue.pop_front();
    if (x.count(id)) continue;
    const Settled& s = settled.at(id);
    x[id] = s.node;
    for (const auto& ch : g.eclass(id).nodes[s.node].children)
      queue.push_back(ch);
  }
  return x;
}

OracleResult oracle_extract(const EGraph& g) {
  // Classes reachable from the roots through any node bound the search space.
  std::set<std::string> seen(g.roots.begin(), g.roots.end());
  std::deque<std::string> queue(g.roots.begin(), g.roots.end());
  while (!queue.empty()) {
    std::string id = queue.front();
    queue.pop_front();
    for (const auto& n : g.eclass(id).nodes)
      for (const auto& ch : n.children)
        if (seen.insert(ch).second) queue.push_back(ch);
  }
  std::vector<const EClass*> space;
  for (const auto& id : seen) space.push_back(&g.eclass(id)); // id order
  int64_t product = 1;
  for (const EClass* c : space) {
    product *= static_cast<int64_t>(c->nodes.size());
    if (product > 1000000)
      throw Error(ErrorCode::TooLarge, "oracle search space exceeds 10^6");
  }

  std::vector<int> choice(space.size(), 0);
  bool found = false;
  OracleResult best;
  for (;;) {
    Extraction full;
    for (size_t i = 0; i < space.size(); ++i) full[space[i]->id] = choice[i];
    Extraction x;
    for (const auto& id : choice_reachable(g, full, nullptr))
      x[id] = full.at(id);
    if (is_valid_extraction(g, x).valid) {
      int64_t cost = extraction_cost(g, x);
      if (!found || cost < best.cost) {
        found = true;
        best = {x, cost};
      }
    }
    // Lexicographic successor of the choice vector.
    bool wrapped = true;
    for (size_t i = space.size(); i-- > 0;) {
      if (++choice[i] < static_cast<int>(space[i]->nodes.size())) {
        wrapped = false;
        break;
      }
      choice[i] = 0;
    }
    if (wrapped) break;
  }
  if (!found)
    throw Error(ErrorCode::NoValidExtraction, "no valid extraction exists");
  return best;
}

std::string egraph_to_json(const EGraph& g) {
  json jc = json::array();
  for (const auto& c : g.classes) {
    json jn = json::array();
    for (const auto& n : c.nodes)
      jn.push_back({{"op", n.op}, {"cost", n.cost}, {"children", n.children}});
    jc.push_back({{"id", c.id}, {"nodes", jn}});
  }
  json j{{"classes", jc}, {"roots", g.roots}};
  return j.dump(2) + "\n";
}

EGraph egraph_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    EGraph g;
    for (const auto& jc : j.at("classes")) {
      EClass c;
      c.id = jc.at("id").get<std::string>();
      for (const auto& jn : jc.at("nodes")) {
        ENode n;
        n.op = jn.at("op").get<std::string>();
        n.cost = jn.at("cost").get<int64_t>();
        n.children = jn.at("children").get<std::vector<std::string>>();
        c.nodes.push_back(std::move(n));
      }
      g.classes.push_back(std::move(c));
    }
    for (const auto& r : j.at("roots")) g.roots.insert(r.get<std::string>());
    g.check();
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("e-graph JSON: ") + e.what());
  }
}

EGraph generate_egraph(uint64_t seed, const EGraphGenConfig& cfg) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {
    return static_cast<int>(lo + rng() % static_cast<uint64_t>(hi - lo + 1));
  };
  int n = pick(cfg.min_classes, cfg.max_classes);

  EGraph g;
  g.classes.resize(n);
  auto cid = [](int i) { return "c" + std::to_string(i); };
  for (int i = 0; i < n; ++i) {
    EClass& c = g.classes[i];
    c.id = cid(i);
    // Planted node: children strictly below, guaranteeing one valid
    // extraction and a known cheap skeleton.
    ENode planted;
    planted.op = "op" + std::to_string(pick(0, 7));
    planted.cost = pick(1, 5);
    if (i > 0)
      for (int k = pick(0, std::min(2, i)); k > 0; --k)
        planted.children.push_back(cid(pick(0, i - 1)));
    c.nodes.push_back(std::move(planted));
    // Distractors: temptingly cheap nodes that may point anywhere, including
    // upward (potential cycles under a careless extraction).
    for (int extra = pick(0, 2); extra > 0; --extra) {
      ENode d;
      d.op = "op" + std::to_string(pick(0, 7));
      d.cost = pick(0, 20);
      for (int k = pick(0, 2); k > 0; --k)
        d.children.push_back(cid(pick(0, n - 1)));
      c.nodes.push_back(std::move(d));
    }
  }
  g.roots.insert(cid(n - 1));
  if (n > 2 && pick(0, 1)) g.roots.insert(cid(pick(0, n - 2)));
  g.check();
  return g;
}

EGraph egraph_counterexample() {
  // The root offers a cost-1 node over an expensive subtree and a cost-3 node
  // over a cheap one; locally cheapest selection pays 11 where 4 suffices.
  EGraph g;
  g.classes = {
      {"a", {{"expensive", 10, {}}}},
      {"b", {{"cheap", 1, {}}}},
      {"r", {{"f", 1, {"a"}}, {"g", 3, {"b"}}}},
  };
  g.roots = {"r"};
  g.check();
  return g;
}

} // namespace hew
