#include "hew/autotune.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

ParamSpace ParamSpace::from_template(const PolicyTemplate& t) {
  ParamSpace s;
  for (const auto& slot : t.slots)
    s.dims.push_back({slot.name, slot.lo, slot.hi, slot.def});
  return s;
}

namespace {

int64_t uniform_in(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

SlotAssignment defaults_of(const ParamSpace& space) {
  SlotAssignment a;
  for (const auto& d : space.dims) a[d.name] = d.def;
  return a;
}

// One stratified sample: every dimension drawn from stratum `slot` of
// `strata`, with per-dimension stratum permutations fixed by the rng.
SlotAssignment stratified(const ParamSpace& space, std::mt19937_64& rng,
                          const std::vector<std::vector<int>>& perms, int slot) {
  SlotAssignment a;
  for (size_t d = 0; d < space.dims.size(); ++d) {
    const auto& dim = space.dims[d];
    int strata = static_cast<int>(perms[d].size());
    int s = perms[d][slot % strata];
    int64_t range = dim.hi - dim.lo + 1;
    int64_t lo = dim.lo + range * s / strata;
    int64_t hi = dim.lo + range * (s + 1) / strata - 1;
    a[dim.name] = uniform_in(rng, lo, std::max(lo, hi));
  }
  return a;
}

SlotAssignment random_point(const ParamSpace& space, std::mt19937_64& rng) {
  SlotAssignment a;
  for (const auto& d : space.dims) a[d.name] = uniform_in(rng, d.lo, d.hi);
  return a;
}

} // namespace

std::vector<SlotAssignment> propose_batch(const ParamSpace& space,
                                          const std::vector<TuneTrial>& history,
                                          int n, uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::BadInput, "batch size must be >= 1");
  if (space.dims.empty()) return {SlotAssignment{}};

  std::mt19937_64 rng(seed);
  std::set<SlotAssignment> used;
  for (const auto& t : history) used.insert(t.assignment);

  std::vector<SlotAssignment> batch;
  auto push = [&](SlotAssignment a) {
    for (int retry = 0; retry < 16 && used.count(a); ++retry)
      a = random_point(space, rng);
    used.insert(a);
    batch.push_back(std::move(a));
  };

  const int round =
      history.empty() ? 1 : static_cast<int>(history.size()) / std::max(1, n) + 1;

  if (round == 1) {
    push(defaults_of(space));
    int strata = std::max(1, n - 1);
    std::vector<std::vector<int>> perms(space.dims.size());
    for (auto& p : perms) {
      p.resize(strata);
      for (int i = 0; i < strata; ++i) p[i] = i;
      std::shuffle(p.begin(), p.end(), rng);
    }
    for (int i = 0; static_cast<int>(batch.size()) < n; ++i)
      push(stratified(space, rng, perms, i));
    return batch;
  }

  // Exploitation around the best valid trial so far (earliest tie wins).
  const TuneTrial* best = nullptr;
  for (const auto& t : history)
    if (t.score && (!best || *t.score > *best->score)) best = &t;
  SlotAssignment center = best ? best->assignment : defaults_of(space);

  int exploit = n / 2;
  double shrink = std::pow(0.7, round - 2);
  for (int i = 0; i < exploit; ++i) {
    SlotAssignment a = center;
    const auto& dim = space.dims[rng() % space.dims.size()];
    double half = static_cast<double>(dim.hi - dim.lo) / 2.0 * shrink;
    int64_t radius = std::max<int64_t>(1, static_cast<int64_t>(half));
    int64_t v = a[dim.name] + uniform_in(rng, -radius, radius);
    a[dim.name] = std::clamp(v, dim.lo, dim.hi);
    push(std::move(a));
  }
  int strata = std::max(1, n - exploit);
  std::vector<std::vector<int>> perms(space.dims.size());
  for (auto& p : perms) {
    p.resize(strata);
    for (int i = 0; i < strata; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
  }
  for (int i = 0; static_cast<int>(batch.size()) < n; ++i)
    push(stratified(space, rng, perms, i));
  return batch;
}

TuneResult tune(const PolicyTemplate& t, const TuneObjective& objective,
                const TuneBudget& budget) {
  if (budget.batch_size < 1 || budget.rounds < 1)
    throw Error(ErrorCode::BadInput, "tune budget must be positive");
  ParamSpace space = ParamSpace::from_template(t);

  TuneResult res;
  res.best = t.default_assignment();
  const int rounds = space.dims.empty() ? 1 : budget.rounds;
  for (int round = 1; round <= rounds; ++round) {
    auto batch = propose_batch(space, res.log, budget.batch_size,
                               mix_seed(budget.rng_seed, static_cast<uint64_t>(round)));
    for (size_t i = 0; i < batch.size(); ++i) {
      TuneTrial trial;
      trial.round = round;
      trial.index = static_cast<int>(i);
      trial.assignment = batch[i];
      trial.score = objective(batch[i]);
      if (trial.score &&
          (!res.best_score || *trial.score > *res.best_score)) {
        res.best_score = trial.score;
        res.best = trial.assignment;
      }
      res.log.push_back(std::move(trial));
    }
    if (space.dims.empty()) break;
  }
  return res;
}

std::string tune_log_to_jsonl(const std::vector<TuneTrial>& log) {
  std::string out;
  for (const auto& t : log) {
    json j{{"round", t.round},
           {"index", t.index},
           {"assignment", t.assignment},
           {"score", t.score ? json(*t.score) : json(nullptr)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

} // namespace hew
