#include "hew/shard.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

void ShardProblem::check() const {
  if (budget < 0) throw Error(ErrorCode::BadInput, "negative budget");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const ShardNode& n = nodes[i];
    if (n.strategies.empty())
      throw Error(ErrorCode::BadInput, "node without strategies: " + std::to_string(i));
    if (n.start >= n.end)
      throw Error(ErrorCode::BadInput, "empty interval on node " + std::to_string(i));
    for (const auto& s : n.strategies)
      if (s.cost < 0 || s.memory < 0)
        throw Error(ErrorCode::BadInput, "negative strategy field on node " +
                                             std::to_string(i));
  }
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= static_cast<int>(nodes.size()) ||
        e.v >= static_cast<int>(nodes.size()) || e.u == e.v)
      throw Error(ErrorCode::BadInput, "bad edge endpoints");
    if (e.costs.size() != nodes[e.u].strategies.size())
      throw Error(ErrorCode::BadInput, "edge matrix row count mismatch");
    for (const auto& row : e.costs) {
      if (row.size() != nodes[e.v].strategies.size())
        throw Error(ErrorCode::BadInput, "edge matrix column count mismatch");
      for (int64_t c : row)
        if (c < 0) throw Error(ErrorCode::BadInput, "negative edge cost");
    }
  }
}

namespace {

void require_total(const ShardProblem& p, const ShardAssignment& a) {
  if (a.size() != p.nodes.size())
    throw Error(ErrorCode::IncompleteAssignment, "assignment size mismatch");
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] < 0 || a[i] >= static_cast<int>(p.nodes[i].strategies.size()))
      throw Error(ErrorCode::IncompleteAssignment,
                  "strategy index out of range on node " + std::to_string(i));
}

struct SweepResult {
  int64_t peak = 0;
  int64_t excess_area = 0;               // total over-budget integral
  std::optional<int64_t> first_violation; // earliest over-budget time
};

// Event sweep over half-open intervals; `pick` maps node index -> memory use
// (negative = node not placed, contributes nothing).
template <class Pick>
SweepResult sweep(const ShardProblem& p, int64_t budget, Pick pick) {
  std::vector<std::pair<int64_t, int64_t>> events; // (time, delta)
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    int64_t m = pick(i);
    if (m <= 0) continue;
    events.emplace_back(p.nodes[i].start, m);
    events.emplace_back(p.nodes[i].end, -m);
  }
  std::sort(events.begin(), events.end());
  SweepResult r;
  int64_t current = 0;
  for (size_t i = 0; i < events.size();) {
    int64_t t = events[i].first;
    while (i < events.size() && events[i].first == t) current += events[i++].second;
    r.peak = std::max(r.peak, current);
    if (current > budget) {
      if (!r.first_violation) r.first_violation = t;
      int64_t until = i < events.size() ? events[i].first : t;
      r.excess_area += (current - budget) * std::max<int64_t>(1, until - t);
    }
  }
  return r;
}

} // namespace

int64_t total_cost(const ShardProblem& p, const ShardAssignment& a) {
  require_total(p, a);
  int64_t total = 0;
  for (size_t i = 0; i < p.nodes.size(); ++i)
    total += p.nodes[i].strategies[a[i]].cost;
  for (const auto& e : p.edges) total += e.costs[a[e.u]][a[e.v]];
  return total;
}

MemoryCheck peak_memory_ok(const ShardProblem& p, const ShardAssignment& a) {
  require_total(p, a);
  SweepResult r = sweep(p, p.budget, [&](size_t i) {
    return p.nodes[i].strategies[a[i]].memory;
  });
  return {!r.first_violation.has_value(), r.first_violation};
}

const FeatureCatalog& shard_feature_catalog() {
  static const FeatureCatalog cat = [] {
    FeatureCatalog c;
    c.name = "shard";
    c.version = 1;
    c.entries = {{"strategy_cost", ExprType::Int},
                 {"strategy_memory", ExprType::Int},
                 {"edge_cost_assigned", ExprType::Int},
                 {"edge_cost_unassigned_best", ExprType::Int},
                 {"slack", ExprType::Int}};
    return c;
  }();
  return cat;
}

PolicyTemplate shard_baseline_scoring() {
  PolicyTemplate t;
  t.root = Expr::un(ExprOp::Neg, Expr::feat("strategy_cost"));
  t.meta.proposer = "seed";
  return t;
}

std::optional<ShardAssignment> heuristic_solve(const ShardProblem& p,
                                               const PolicyTemplate& scoring,
                                               const SlotAssignment& slots) {
  const FeatureCatalog& cat = shard_feature_catalog();
  const int n = static_cast<int>(p.nodes.size());

  // Fixed construction order: descending minimum strategy memory, then index.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto min_mem = [&](int i) {
    int64_t m = p.nodes[i].strategies[0].memory;
    for (const auto& s : p.nodes[i].strategies) m = std::min(m, s.memory);
    return m;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return min_mem(a) > min_mem(b); });

  std::vector<std::vector<const ShardEdge*>> incident(n);
  for (const auto& e : p.edges) {
    incident[e.u].push_back(&e);
    incident[e.v].push_back(&e);
  }

  ShardAssignment assign(n, -1);
  auto placed_memory = [&](int extra_node, int extra_strat) {
    return [&, extra_node, extra_strat](size_t i) -> int64_t {
      int s = static_cast<int>(i) == extra_node ? extra_strat : assign[i];
      return s < 0 ? 0 : p.nodes[i].strategies[s].memory;
    };
  };

  for (int node : order) {
    int best = -1;
    int64_t best_score = 0;
    int fallback = 0; // min-memory strategy, for the repair pass
    for (int s = 0; s < static_cast<int>(p.nodes[node].strategies.size()); ++s) {
      const ShardStrategy& st = p.nodes[node].strategies[s];
      if (st.memory < p.nodes[node].strategies[fallback].memory) fallback = s;
      SweepResult sw = sweep(p, p.budget, placed_memory(node, s));
      if (sw.first_violation) continue; // infeasible so far
      int64_t edge_assigned = 0, edge_unassigned = 0;
      for (const ShardEdge* e : incident[node]) {
        int other = e->u == node ? e->v : e->u;
        auto cost_at = [&](int so) {
          return e->u == node ? e->costs[s][so] : e->costs[so][s];
        };
        if (assign[other] >= 0) {
          edge_assigned += cost_at(assign[other]);
        } else {
          int64_t m = cost_at(0);
          for (int so = 1; so < static_cast<int>(p.nodes[other].strategies.size()); ++so)
            m = std::min(m, cost_at(so));
          edge_unassigned += m;
        }
      }
      FeatureVector f = {st.cost, st.memory, edge_assigned, edge_unassigned,
                         p.budget - sw.peak};
      int64_t score = eval_template_int(scoring, cat, slots, f);
      if (best < 0 || score > best_score) {
        best = s;
        best_score = score;
      }
    }
    assign[node] = best >= 0 ? best : fallback;
  }

  // Bounded repair: accept single-node reassignments that strictly shrink the
  // over-budget area, scanning in deterministic order.
  auto excess = [&](const ShardAssignment& a) {
    return sweep(p, p.budget, [&](size_t i) {
             return p.nodes[i].strategies[a[i]].memory;
           }).excess_area;
  };
  int64_t cur = excess(assign);
  int limit = 0;
  for (const auto& nd : p.nodes) limit += static_cast<int>(nd.strategies.size());
  for (int pass = 0; cur > 0 && pass < 4 * limit; ++pass) {
    bool improved = false;
    for (int i = 0; i < n && !improved; ++i) {
      for (int s = 0; s < static_cast<int>(p.nodes[i].strategies.size()); ++s) {
        if (s == assign[i]) continue;
        int old = assign[i];
        assign[i] = s;
        int64_t e = excess(assign);
        if (e < cur) {
          cur = e;
          improved = true;
          break;
        }
        assign[i] = old;
      }
    }
    if (!improved) return std::nullopt;
  }
  if (cur > 0) return std::nullopt;
  return assign;
}

ShardOracleResult oracle_solve(const ShardProblem& p) {
  int64_t product = 1;
  for (const auto& nd : p.nodes) {
    product *= static_cast<int64_t>(nd.strategies.size());
    if (product > 1000000)
      throw Error(ErrorCode::TooLarge, "oracle search space exceeds 10^6");
  }
  ShardAssignment choice(p.nodes.size(), 0);
  bool found = false;
  ShardOracleResult best;
  for (;;) {
    if (peak_memory_ok(p, choice).ok) {
      int64_t cost = total_cost(p, choice);
      if (!found || cost < best.cost) {
        found = true;
        best = {choice, cost};
      }
    }
    bool wrapped = true;
    for (size_t i = p.nodes.size(); i-- > 0;) {
      if (++choice[i] < static_cast<int>(p.nodes[i].strategies.size())) {
        wrapped = false;
        break;
      }
      choice[i] = 0;
    }
    if (wrapped || p.nodes.empty()) break;
  }
  if (!found) throw Error(ErrorCode::Infeasible, "no feasible assignment");
  return best;
}

std::string shard_to_json(const ShardProblem& p) {
  json jn = json::array();
  for (const auto& n : p.nodes) {
    json js = json::array();
    for (const auto& s : n.strategies)
      js.push_back({{"cost", s.cost}, {"memory", s.memory}});
    jn.push_back({{"interval", {n.start, n.end}}, {"strategies", js}});
  }
  json je = json::array();
  for (const auto& e : p.edges)
    je.push_back({{"u", e.u}, {"v", e.v}, {"costs", e.costs}});
  json j{{"budget", p.budget}, {"nodes", jn}, {"edges", je}};
  return j.dump(2) + "\n";
}

ShardProblem shard_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    ShardProblem p;
    p.budget = j.at("budget").get<int64_t>();
    for (const auto& jn : j.at("nodes")) {
      ShardNode n;
      n.start = jn.at("interval").at(0).get<int64_t>();
      n.end = jn.at("interval").at(1).get<int64_t>();
      for (const auto& js : jn.at("strategies"))
        n.strategies.push_back(
            {js.at("cost").get<int64_t>(), js.at("memory").get<int64_t>()});
      p.nodes.push_back(std::move(n));
    }
    if (j.contains("edges"))
      for (const auto& je : j.at("edges")) {
        ShardEdge e;
        e.u = je.at("u").get<int>();
        e.v = je.at("v").get<int>();
        e.costs = je.at("costs").get<std::vector<std::vector<int64_t>>>();
        p.edges.push_back(std::move(e));
      }
    p.check();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("shard JSON: ") + e.what());
  }
}

ShardProblem generate_shard_problem(uint64_t seed, const ShardGenConfig& cfg) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
  };
  ShardProblem p;
  int n = static_cast<int>(pick(cfg.min_nodes, cfg.max_nodes));
  std::vector<int> planted(n);
  for (int i = 0; i < n; ++i) {
    ShardNode node;
    node.start = pick(0, cfg.horizon - 2);
    node.end = std::min<int64_t>(cfg.horizon, node.start + pick(1, cfg.horizon / 4));
    int k = static_cast<int>(pick(1, cfg.max_strategies));
    for (int s = 0; s < k; ++s)
      node.strategies.push_back({pick(5, 25), pick(1, 12)});
    // One strategy is designated feasible glue: modest memory, middling cost.
    planted[i] = static_cast<int>(pick(0, k - 1));
    node.strategies[planted[i]].memory = pick(1, 4);
    // A tempting trap: cheapest cost but heavy memory.
    if (k > 1) {
      int trap = (planted[i] + 1) % k;
      node.strategies[trap].cost = pick(0, 4);
      node.strategies[trap].memory = pick(10, 20);
    }
    p.nodes.push_back(std::move(node));
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (pick(0, 2) == 0) continue;
    ShardEdge e;
    e.u = i;
    e.v = static_cast<int>(pick(i + 1, n - 1));
    e.costs.assign(p.nodes[e.u].strategies.size(),
                   std::vector<int64_t>(p.nodes[e.v].strategies.size(), 0));
    for (auto& row : e.costs)
      for (auto& c : row) c = pick(0, 10);
    p.edges.push_back(std::move(e));
  }
  // Budget = planted peak plus a little slack, so feasibility is guaranteed.
  int64_t peak = sweep(p, 0, [&](size_t i) {
                   return p.nodes[i].strategies[planted[i]].memory;
                 }).peak;
  p.budget = peak + pick(0, 3);
  p.check();
  return p;
}

ShardProblem shard_counterexample() {
  // Cheapest-strategy construction takes node 0's cost-1 strategy and pays a
  // cost-10 edge; the cost-2 strategy makes the edge free.
  ShardProblem p;
  p.budget = 0;
  p.nodes = {
      {0, 1, {{1, 0}, {2, 0}}},
      {0, 1, {{0, 0}}},
  };
  p.edges = {{0, 1, {{10}, {0}}}};
  p.check();
  return p;
}

} // namespace hew
