#pragma once

#include <functional>
#include <optional>

#include "hew/dsl.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Inner-loop hyperparameter search over a fixed template. Round 1 is the
// defaults plus stratified (Latin-hypercube-style) random; later rounds split
// between coordinate perturbation of the best-so-far with geometrically
// shrinking radius and fresh stratified random. Fully deterministic per seed.
// ---------------------------------------------------------------------------

struct ParamSpace {
  struct Dim {
    std::string name;
    int64_t lo = 0, hi = 0, def = 0;
  };
  std::vector<Dim> dims;

  static ParamSpace from_template(const PolicyTemplate& t);
};

struct TuneTrial {
  int round = 0;
  int index = 0;
  SlotAssignment assignment;
  std::optional<double> score; // nullopt = Invalid
};

struct TuneBudget {
  int batch_size = 10;
  int rounds = 20;
  uint64_t rng_seed = 0;
};

/// n in-bounds assignments; duplicates against history replaced by fresh
/// draws (bounded retries). A zero-dim space yields the single empty
/// assignment.
std::vector<SlotAssignment> propose_batch(const ParamSpace& space,
                                          const std::vector<TuneTrial>& history,
                                          int n, uint64_t seed);

using TuneObjective = std::function<std::optional<double>(const SlotAssignment&)>;

struct TuneResult {
  SlotAssignment best;             // defaults when every trial was Invalid
  std::optional<double> best_score;
  std::vector<TuneTrial> log;      // ordered by (round, index)
};

/// Best over all trials by score, ties by earliest trial.
TuneResult tune(const PolicyTemplate& t, const TuneObjective& objective,
                const TuneBudget& budget);

std::string tune_log_to_jsonl(const std::vector<TuneTrial>& log);

} // namespace hew
