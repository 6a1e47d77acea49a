#pragma once

#include <optional>

#include "hew/autotune.hpp"
#include "hew/harness.hpp"
#include "hew/proposer.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Outer loop: tournament selection over a single population with elitist
// truncation, built-in mutation/crossover or an external proposer (with
// fallback), and per-candidate inner tuning. Deterministic per seed when no
// external proposer is configured.
// ---------------------------------------------------------------------------

struct Candidate {
  std::string id;
  PolicyTemplate tmpl;
  SlotAssignment best_assignment;
  std::optional<double> best_score; // nullopt = Invalid
  std::vector<std::string> parent_ids;
  int generation = 0;
  std::string proposer; // seed | mutation | crossover | external
  std::string diagnostics;
  int64_t eval_cost = 0;
};

struct IterationStats {
  int iteration = 0;
  double best = 0.0;        // global best valid score so far
  double mean_valid = 0.0;  // mean score of valid population members
  double invalid_rate = 0.0; // invalid children / children this iteration
  int64_t evals_cumulative = 0;
};

struct RunConfig {
  int population_size = 16;
  int iterations = 10;
  int proposals_per_iteration = 8;
  int tune_batch = 10;
  int tune_rounds = 5;
  int tournament_k = 3;
  bool tune = true; // false = slot-frozen: children evaluated at defaults only
  std::string task_id = "inline-size";
  uint64_t seed = 0;
  ProposerConfig proposer{}; // empty command = built-in variation only
};

struct EvolutionDb {
  RunConfig config;
  std::vector<Candidate> candidates;      // append-only
  std::vector<std::string> population;    // ids, best first
  int iteration = 0;
  int64_t evals_cumulative = 0;
  std::vector<IterationStats> curve;
  int fallback_count = 0; // external proposer failures recovered by mutation
};

EvolutionDb seed_db(const RunConfig& config, const std::vector<PolicyTemplate>& seeds,
                    const Task& task);

void step(EvolutionDb& db, const Task& task);

struct RunResult {
  Candidate best;
  std::vector<IterationStats> curve;
  EvolutionDb db;
};

RunResult run(const RunConfig& config, const std::vector<PolicyTemplate>& seeds,
              const Task& task);

const Candidate& best_candidate(const EvolutionDb& db);

/// Candidate store as JSON lines; curve as CSV with columns
/// iteration,best,mean_valid,invalid_rate,evals_cumulative.
std::string candidates_to_jsonl(const EvolutionDb& db);
std::string curve_to_csv(const std::vector<IterationStats>& curve);

} // namespace hew
