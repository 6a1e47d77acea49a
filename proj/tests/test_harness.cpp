#include "doctest.h"

#include "helpers.hpp"
#include "hew/harness.hpp"
#include "hew/reference_policies.hpp"

using namespace hew;
using namespace hewtest;

namespace {

std::vector<Program> small_corpus(int n, uint64_t seed0 = 100) {
  std::vector<Program> out;
  for (int i = 0; i < n; ++i) out.push_back(generate_program(seed0 + i));
  return out;
}

} // namespace

TEST_CASE("never-inline scores exactly zero on both inline tasks") {
  for (InlineMetric m : {InlineMetric::Size, InlineMetric::Perf}) {
    Task task = make_inline_task(small_corpus(4), m);
    RewardReport r = task.evaluate(never_inline_template(), {});
    REQUIRE(r.valid);
    CHECK(r.score == 0.0);
    CHECK(r.breakdown.size() == 4);
    for (double item : r.breakdown) CHECK(item == 0.0);
    CHECK(r.eval_cost == 4);
  }
}

TEST_CASE("baseline priority/scoring scores exactly zero on egraph and shard") {
  std::vector<EGraph> graphs;
  for (uint64_t s = 1; s <= 6; ++s) graphs.push_back(generate_egraph(s, {6, 11}));
  Task eg = make_egraph_task(std::move(graphs));
  RewardReport r = eg.evaluate(egraph_baseline_priority(), {});
  REQUIRE(r.valid);
  CHECK(r.score == 0.0);

  std::vector<ShardProblem> problems;
  for (uint64_t s = 1; s <= 6; ++s)
    problems.push_back(generate_shard_problem(s, {4, 8, 3, 30}));
  Task sh = make_shard_task(std::move(problems));
  RewardReport q = sh.evaluate(shard_baseline_scoring(), {});
  REQUIRE(q.valid);
  CHECK(q.score == 0.0);
}

TEST_CASE("task validation gate") {
  Task task = make_inline_task(small_corpus(1), InlineMetric::Size);
  SUBCASE("unknown feature") {
    PolicyTemplate t = parse_template("(lt @no_such_feature 3)");
    CHECK_FALSE(validate_for_task(t, task).ok);
  }
  SUBCASE("wrong root type") {
    PolicyTemplate t = parse_template("(add @callee_raw_count 1)");
    CHECK_FALSE(validate_for_task(t, task).ok);
  }
  SUBCASE("depth limit") {
    std::string text = "@callee_raw_count";
    for (int i = 0; i < kMaxExprDepth; ++i) text = "(add 1 " + text + ")";
    PolicyTemplate t = parse_template("(lt " + text + " 5)");
    auto r = validate_for_task(t, task);
    CHECK_FALSE(r.ok);
    CHECK(r.reason == "DepthLimit");
  }
  SUBCASE("valid template passes") {
    CHECK(validate_for_task(as_template(ReferencePolicy::SizeA), task).ok);
  }
  // egraph/shard tasks require an Int root.
  Task eg = make_egraph_task({generate_egraph(1)});
  CHECK(eg.required_root == ExprType::Int);
  CHECK(validate_for_task(egraph_baseline_priority(), eg).ok);
  CHECK_FALSE(validate_for_task(never_inline_template(), eg).ok);
}

TEST_CASE("evaluation failures surface as Invalid, not exceptions") {
  Task task = make_inline_task(small_corpus(2), InlineMetric::Size);
  // Missing slot value at evaluation time.
  PolicyTemplate t = parse_template(
      "[hyperparam]: k, int, 0, 10, 5\n(lt @callee_weighted_size $k)");
  RewardReport r = task.evaluate(t, {});
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.score.has_value());
  CHECK_FALSE(r.diagnostics.empty());
  // Out-of-bounds slot value.
  RewardReport q = task.evaluate(t, {{"k", 99}});
  CHECK_FALSE(q.valid);
  // In-bounds works.
  CHECK(task.evaluate(t, {{"k", 5}}).valid);
}

TEST_CASE("evaluation is referentially transparent") {
  std::vector<Program> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back(generate_program(60 + i, {10, 3, 8, 3}));
  Task task = make_inline_task(std::move(corpus), InlineMetric::Perf);
  PolicyTemplate t = as_template(ReferencePolicy::PerfB);
  SlotAssignment tuned = PerfPolicyParams::tuned().as_assignment();
  RewardReport a = task.evaluate(t, tuned);
  RewardReport b = task.evaluate(t, tuned);
  CHECK(a.valid == b.valid);
  CHECK(a.score == b.score);
  CHECK(a.breakdown == b.breakdown);
  CHECK(a.eval_cost == b.eval_cost);
}

TEST_CASE("corpus JSON round trip drives the same task") {
  for (const char* id : {"inline-size", "inline-perf", "egraph", "shard"}) {
    std::string corpus = generate_corpus_json(id, 5, 77);
    CHECK(corpus == generate_corpus_json(id, 5, 77));
    CHECK(corpus != generate_corpus_json(id, 5, 78));
    Task task = make_task_from_corpus_json(id, corpus);
    CHECK(task.id == id);
    PolicyTemplate seed = naive_seed_for_task(id);
    RewardReport r = task.evaluate(seed, seed.default_assignment());
    REQUIRE(r.valid);
    CHECK(r.score == 0.0); // the naive seed is each task's reward zero-point
  }
  CHECK_THROWS_AS(generate_corpus_json("nope", 3, 1), Error);
  CHECK_THROWS_AS(make_task_from_corpus_json("inline-size", "{"), Error);
  CHECK_THROWS_AS(make_task_from_corpus_json("nope", "[]"), Error);
}

TEST_CASE("reward report JSON carries the score and validity") {
  RewardReport r;
  r.valid = true;
  r.score = 12.5;
  r.breakdown = {10.0, 15.0};
  r.eval_cost = 2;
  std::string j = reward_report_to_json(r);
  CHECK(j.find("12.5") != std::string::npos);
  CHECK(reward_report_to_json(RewardReport::invalid("why")).find("why") !=
        std::string::npos);
}
