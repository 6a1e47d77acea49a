#include "hew/evolve.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

namespace {

// Rank: valid beats invalid, higher score beats lower, older candidate (lower
// store index) wins ties.
bool better(const Candidate& a, size_t ia, const Candidate& b, size_t ib) {
  if (a.best_score.has_value() != b.best_score.has_value())
    return a.best_score.has_value();
  if (a.best_score && b.best_score && *a.best_score != *b.best_score)
    return *a.best_score > *b.best_score;
  return ia < ib;
}

size_t index_of(const EvolutionDb& db, const std::string& id) {
  for (size_t i = 0; i < db.candidates.size(); ++i)
    if (db.candidates[i].id == id) return i;
  throw Error(ErrorCode::Internal, "unknown candidate id: " + id);
}

void evaluate_candidate(const RunConfig& config, const Task& task,
                        Candidate& c, uint64_t tune_seed) {
  ValidationResult vr = validate_for_task(c.tmpl, task);
  if (!vr.ok) {
    c.diagnostics = "rejected: " + vr.reason;
    return;
  }
  int64_t cost = 0;
  auto objective = [&](const SlotAssignment& slots) -> std::optional<double> {
    RewardReport r = task.evaluate(c.tmpl, slots);
    cost += r.eval_cost;
    if (!r.valid && c.diagnostics.empty()) c.diagnostics = r.diagnostics;
    return r.score;
  };
  if (config.tune && !c.tmpl.slots.empty()) {
    TuneBudget budget{config.tune_batch, config.tune_rounds, tune_seed};
    TuneResult tr = tune(c.tmpl, objective, budget);
    c.best_assignment = tr.best;
    c.best_score = tr.best_score;
  } else {
    c.best_assignment = c.tmpl.default_assignment();
    c.best_score = objective(c.best_assignment);
  }
  if (c.best_score) c.diagnostics.clear();
  c.eval_cost = cost;
}

void truncate_population(EvolutionDb& db) {
  std::vector<size_t> order(db.candidates.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return better(db.candidates[a], a, db.candidates[b], b);
  });
  db.population.clear();
  for (size_t i : order) {
    if (static_cast<int>(db.population.size()) >= db.config.population_size) break;
    db.population.push_back(db.candidates[i].id);
  }
}

size_t tournament(const EvolutionDb& db, std::mt19937_64& rng) {
  size_t best = SIZE_MAX;
  for (int i = 0; i < db.config.tournament_k; ++i) {
    size_t pick = index_of(db, db.population[rng() % db.population.size()]);
    if (best == SIZE_MAX ||
        better(db.candidates[pick], pick, db.candidates[best], best))
      best = pick;
  }
  return best;
}

// Every stat is recomputable from the candidate store alone (see cmd_curve):
// mean_valid covers the iteration's valid children, not the population.
void record_stats(EvolutionDb& db, int invalid_children, int total_children) {
  IterationStats s;
  s.iteration = db.iteration;
  s.best = best_candidate(db).best_score.value_or(0.0);
  double sum = 0.0;
  int n = 0;
  for (const auto& c : db.candidates) {
    if (c.generation != db.iteration || !c.best_score) continue;
    sum += *c.best_score;
    ++n;
  }
  s.mean_valid = n ? sum / n : 0.0;
  s.invalid_rate =
      total_children ? static_cast<double>(invalid_children) / total_children : 0.0;
  s.evals_cumulative = db.evals_cumulative;
  db.curve.push_back(s);
}

} // namespace

const Candidate& best_candidate(const EvolutionDb& db) {
  if (db.candidates.empty())
    throw Error(ErrorCode::Internal, "empty candidate store");
  size_t best = 0;
  for (size_t i = 1; i < db.candidates.size(); ++i)
    if (better(db.candidates[i], i, db.candidates[best], best)) best = i;
  return db.candidates[best];
}

EvolutionDb seed_db(const RunConfig& config,
                    const std::vector<PolicyTemplate>& seeds, const Task& task) {
  if (seeds.empty())
    throw Error(ErrorCode::BadInput, "seed_db needs at least one seed");
  EvolutionDb db;
  db.config = config;
  for (size_t i = 0; i < seeds.size(); ++i) {
    Candidate c;
    c.id = "cand-" + std::to_string(db.candidates.size());
    c.tmpl = seeds[i];
    c.generation = 0;
    c.proposer = "seed";
    evaluate_candidate(config, task, c, mix_seed(config.seed, i));
    db.evals_cumulative += c.eval_cost;
    db.candidates.push_back(std::move(c));
  }
  truncate_population(db);
  return db;
}

void step(EvolutionDb& db, const Task& task) {
  const RunConfig& config = db.config;
  ++db.iteration;
  std::mt19937_64 rng(mix_seed(config.seed, 0x1000000ull + db.iteration));

  int invalid_children = 0;
  for (int j = 0; j < config.proposals_per_iteration; ++j) {
    size_t p1 = tournament(db, rng);
    size_t p2 = tournament(db, rng);
    uint64_t child_seed =
        mix_seed(config.seed, db.iteration * 100003ull + static_cast<uint64_t>(j));

    Candidate c;
    c.id = "cand-" + std::to_string(db.candidates.size());
    c.generation = db.iteration;

    if (!config.proposer.command.empty()) {
      ProposalRequest req;
      req.task_id = task.id;
      req.catalog_name = task.catalog->name;
      req.catalog_version = task.catalog->version;
      for (size_t pi : {p1, p2}) {
        const Candidate& par = db.candidates[pi];
        req.parents.push_back({print_template(par.tmpl), par.best_score,
                               par.diagnostics});
        c.parent_ids.push_back(par.id);
      }
      try {
        c.tmpl = external_propose(config.proposer, req);
        c.proposer = "external";
      } catch (const Error& e) {
        ++db.fallback_count;
        c.tmpl = mutate(db.candidates[p1].tmpl, *task.catalog,
                        task.required_root, child_seed)
                     .tmpl;
        c.proposer = "mutation";
        c.diagnostics = std::string("external fallback: ") + e.what();
      }
    } else if (p1 != p2 && rng() % 4 == 0) {
      c.tmpl = crossover(db.candidates[p1].tmpl, db.candidates[p2].tmpl,
                         *task.catalog, task.required_root, child_seed);
      c.proposer = "crossover";
      c.parent_ids = {db.candidates[p1].id, db.candidates[p2].id};
    } else {
      c.tmpl = mutate(db.candidates[p1].tmpl, *task.catalog, task.required_root,
                      child_seed)
                   .tmpl;
      c.proposer = "mutation";
      c.parent_ids = {db.candidates[p1].id};
    }
    c.tmpl.meta.parent_ids = c.parent_ids;
    c.tmpl.meta.generation = db.iteration;
    c.tmpl.meta.proposer = c.proposer;

    std::string fallback_note = c.diagnostics;
    evaluate_candidate(config, task, c, mix_seed(child_seed, 0xabcd));
    if (!fallback_note.empty())
      c.diagnostics = c.diagnostics.empty()
                          ? fallback_note
                          : fallback_note + "; " + c.diagnostics;
    if (!c.best_score) ++invalid_children;
    db.evals_cumulative += c.eval_cost;
    db.candidates.push_back(std::move(c));
  }
  truncate_population(db);
  record_stats(db, invalid_children, config.proposals_per_iteration);
}

RunResult run(const RunConfig& config, const std::vector<PolicyTemplate>& seeds,
              const Task& task) {
  EvolutionDb db = seed_db(config, seeds, task);
  for (int i = 0; i < config.iterations; ++i) step(db, task);
  return {best_candidate(db), db.curve, std::move(db)};
}

std::string candidates_to_jsonl(const EvolutionDb& db) {
  std::string out;
  std::set<std::string> pop(db.population.begin(), db.population.end());
  for (const auto& c : db.candidates) {
    json j{{"id", c.id},
           {"template", print_template(c.tmpl)},
           {"best_assignment", c.best_assignment},
           {"best_score", c.best_score ? json(*c.best_score) : json(nullptr)},
           {"parents", c.parent_ids},
           {"generation", c.generation},
           {"proposer", c.proposer},
           {"diagnostics", c.diagnostics},
           {"eval_cost", c.eval_cost},
           {"in_population", pop.count(c.id) != 0}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string curve_to_csv(const std::vector<IterationStats>& curve) {
  std::string out = "iteration,best,mean_valid,invalid_rate,evals_cumulative\n";
  char buf[160];
  for (const auto& s : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%lld\n", s.iteration,
                  s.best, s.mean_valid, s.invalid_rate,
                  static_cast<long long>(s.evals_cumulative));
    out += buf;
  }
  return out;
}

} // namespace hew
