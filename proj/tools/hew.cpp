// hew: hierarchical heuristic-evolution workbench CLI.
//
// Subcommands: gen | eval | replay | run | curve. Exit codes: 0 ok, 1 usage,
// 2 input error, 3 internal invariant violation.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hew/evolve.hpp"
#include "hew/features.hpp"
#include "hew/harness.hpp"
#include "hew/reference_policies.hpp"

using json = nlohmann::json;
using namespace hew;

namespace {

constexpr const char* kToolVersion = "hew 1.0.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::BadInput, "cannot write " + path);
  out << content;
}

std::string hash_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

SlotAssignment parse_slots(const std::string& text) {
  SlotAssignment slots;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadInput, "slot spec needs name=value: " + item);
    slots[item.substr(0, eq)] = std::stoll(item.substr(eq + 1));
  }
  return slots;
}

// Flat key=value config text; '#' starts a comment.
std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadInput,
                  "config line " + std::to_string(lineno) + " lacks '='");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  auto geti = [&](const char* key, auto& field) {
    auto it = kv.find(key);
    if (it != kv.end()) field = static_cast<std::decay_t<decltype(field)>>(
                             std::stoll(it->second));
  };
  geti("population_size", c.population_size);
  geti("iterations", c.iterations);
  geti("proposals_per_iteration", c.proposals_per_iteration);
  geti("tune_batch", c.tune_batch);
  geti("tune_rounds", c.tune_rounds);
  geti("tournament_k", c.tournament_k);
  geti("seed", c.seed);
  geti("proposer_timeout_ms", c.proposer.timeout_ms);
  if (auto it = kv.find("tune"); it != kv.end()) c.tune = it->second != "0";
  if (auto it = kv.find("task"); it != kv.end()) c.task_id = it->second;
  if (auto it = kv.find("proposer_cmd"); it != kv.end())
    c.proposer.command = it->second;
  return c;
}

PolicyTemplate resolve_seed(const std::string& name, const std::string& task_id) {
  if (name == "naive") return naive_seed_for_task(task_id);
  if (name == "never") return never_inline_template();
  if (name == "always") return always_inline_template();
  if (name == "size-a") return as_template(ReferencePolicy::SizeA);
  if (name == "perf-b") return as_template(ReferencePolicy::PerfB);
  return parse_template(read_file(name)); // template file path
}

std::vector<PolicyTemplate> resolve_seeds(const std::string& spec,
                                          const std::string& task_id) {
  std::vector<PolicyTemplate> seeds;
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) seeds.push_back(resolve_seed(name, task_id));
  if (seeds.empty()) seeds.push_back(naive_seed_for_task(task_id));
  return seeds;
}

int cmd_gen(const std::string& task, int size, uint64_t seed,
            const std::string& out) {
  write_file(out, generate_corpus_json(task, size, seed));
  return 0;
}

int cmd_eval(const std::string& task_id, const std::string& corpus_path,
             const std::string& template_path, const std::string& slots_text) {
  Task task = make_task_from_corpus_json(task_id, read_file(corpus_path));
  PolicyTemplate t = parse_template(read_file(template_path));
  ValidationResult vr = validate_for_task(t, task);
  if (!vr.ok) throw Error(ErrorCode::MalformedTemplate, vr.reason);
  SlotAssignment slots = t.default_assignment();
  for (const auto& [k, v] : parse_slots(slots_text)) slots[k] = v;
  std::cout << reward_report_to_json(task.evaluate(t, slots));
  return 0;
}

int cmd_replay(const std::string& policy, const std::string& metric_name,
               const std::string& corpus_path, const std::string& trace_path) {
  json arr = json::parse(read_file(corpus_path));
  if (!arr.is_array()) throw Error(ErrorCode::BadInput, "corpus is not an array");

  DecisionFn decide;
  if (policy == "size-a") {
    decide = [](const Program& p, const CallSite& cs) {
      return size_policy_decide(p, cs);
    };
  } else if (policy == "perf-b") {
    decide = [](const Program& p, const CallSite& cs) {
      return perf_policy_decide(p, cs, PerfPolicyParams::tuned());
    };
  } else if (policy == "never") {
    decide = [](const Program&, const CallSite&) { return false; };
  } else if (policy == "always") {
    decide = [](const Program&, const CallSite&) { return true; };
  } else {
    throw Error(ErrorCode::BadInput, "unknown policy: " + policy);
  }

  RunPolicyOptions opts;
  opts.metric = (metric_name.empty() ? (policy == "perf-b" ? "perf" : "size")
                                     : metric_name) == "perf"
                    ? InlineMetric::Perf
                    : InlineMetric::Size;

  std::string trace_out;
  double sum = 0.0;
  json breakdown = json::array();
  int64_t applied = 0;
  for (size_t i = 0; i < arr.size(); ++i) {
    Program p = program_from_json(arr[i].dump());
    RunPolicyResult r = run_policy(p, decide, opts);
    for (const auto& d : r.trace) {
      json j{{"item", i},          {"callsite", d.callsite},
             {"legal", d.legal},   {"recommended", d.recommended},
             {"applied", d.applied}, {"mandatory", d.mandatory}};
      trace_out += j.dump();
      trace_out += '\n';
    }
    sum += r.reward;
    applied += r.applied_count;
    breakdown.push_back(r.reward);
  }
  if (!trace_path.empty())
    write_file(trace_path, trace_out);
  else
    std::cout << trace_out;
  json report{{"reward", arr.empty() ? 0.0 : sum / static_cast<double>(arr.size())},
              {"breakdown", breakdown},
              {"applied_count", applied},
              {"items", arr.size()}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& manifest_path,
            std::string corpus_path, const std::string& out_dir) {
  std::map<std::string, std::string> kv;
  if (!manifest_path.empty()) {
    json m = json::parse(read_file(manifest_path));
    for (const auto& [k, v] : m.at("config").items())
      kv[k] = v.get<std::string>();
    if (corpus_path.empty()) corpus_path = m.at("corpus").get<std::string>();
    std::string bytes = read_file(corpus_path);
    if (hash_hex(bytes) != m.at("corpus_hash").get<std::string>())
      throw Error(ErrorCode::BadInput, "corpus hash mismatch against manifest");
  } else {
    if (!config_path.empty()) kv = parse_config(read_file(config_path));
  }
  if (corpus_path.empty())
    throw Error(ErrorCode::BadInput, "run needs --corpus (or a manifest)");

  RunConfig config = config_from_map(kv);
  config.proposer = ProposerConfig::from_env(config.proposer);
  std::string corpus_bytes = read_file(corpus_path);
  Task task = make_task_from_corpus_json(config.task_id, corpus_bytes);
  std::string seed_spec =
      kv.count("seed_templates") ? kv.at("seed_templates") : "naive";
  std::vector<PolicyTemplate> seeds = resolve_seeds(seed_spec, config.task_id);

  RunResult result = run(config, seeds, task);
  if (result.db.fallback_count > 0)
    std::cerr << "warning: external proposer fell back to mutation "
              << result.db.fallback_count << " time(s)\n";

  // Snapshot every effective config key so a manifest re-run needs no other
  // source of truth.
  std::map<std::string, std::string> snapshot = kv;
  snapshot["task"] = config.task_id;
  snapshot["seed"] = std::to_string(config.seed);
  snapshot["population_size"] = std::to_string(config.population_size);
  snapshot["iterations"] = std::to_string(config.iterations);
  snapshot["proposals_per_iteration"] =
      std::to_string(config.proposals_per_iteration);
  snapshot["tune_batch"] = std::to_string(config.tune_batch);
  snapshot["tune_rounds"] = std::to_string(config.tune_rounds);
  snapshot["tournament_k"] = std::to_string(config.tournament_k);
  snapshot["tune"] = config.tune ? "1" : "0";
  snapshot["seed_templates"] = seed_spec;

  json manifest{{"tool", kToolVersion},
                {"task", config.task_id},
                {"seed", config.seed},
                {"corpus", corpus_path},
                {"corpus_hash", hash_hex(corpus_bytes)},
                {"config", snapshot},
                {"artifacts",
                 {"curve.csv", "candidates.jsonl", "best_template.txt"}}};

  write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  write_file(out_dir + "/curve.csv", curve_to_csv(result.curve));
  write_file(out_dir + "/candidates.jsonl", candidates_to_jsonl(result.db));
  write_file(out_dir + "/best_template.txt", print_template(result.best.tmpl));
  std::cout << "best_score="
            << (result.best.best_score
                    ? std::to_string(*result.best.best_score)
                    : std::string("invalid"))
            << " candidates=" << result.db.candidates.size() << "\n";
  return 0;
}

int cmd_curve(const std::string& store_path) {
  std::string out = "iteration,best,mean_valid,invalid_rate,evals_cumulative\n";
  struct Row {
    int children = 0, invalid = 0, valid = 0;
    double sum = 0.0;
  };
  std::map<int, Row> rows;
  double best = 0.0;
  bool any_valid = false;
  std::map<int, double> best_by_gen;
  std::map<int, int64_t> cost_by_gen;
  std::stringstream ss(read_file(store_path));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    int gen = j.at("generation").get<int>();
    cost_by_gen[gen] += j.at("eval_cost").get<int64_t>();
    bool valid = !j.at("best_score").is_null();
    if (valid) {
      double s = j.at("best_score").get<double>();
      auto it = best_by_gen.find(gen);
      if (it == best_by_gen.end() || s > it->second) best_by_gen[gen] = s;
    }
    if (gen == 0) continue; // seeds are not children of any iteration
    Row& r = rows[gen];
    ++r.children;
    if (valid) {
      ++r.valid;
      r.sum += j.at("best_score").get<double>();
    } else {
      ++r.invalid;
    }
  }
  if (best_by_gen.count(0)) {
    best = best_by_gen[0];
    any_valid = true;
  }
  int64_t evals = cost_by_gen.count(0) ? cost_by_gen[0] : 0;
  char buf[160];
  for (const auto& [gen, r] : rows) {
    if (best_by_gen.count(gen)) {
      best = any_valid ? std::max(best, best_by_gen[gen]) : best_by_gen[gen];
      any_valid = true;
    }
    evals += cost_by_gen.count(gen) ? cost_by_gen[gen] : 0;
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%lld\n", gen,
                  any_valid ? best : 0.0, r.valid ? r.sum / r.valid : 0.0,
                  r.children ? static_cast<double>(r.invalid) / r.children : 0.0,
                  static_cast<long long>(evals));
    out += buf;
  }
  std::cout << out;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical heuristic-evolution workbench"};
  app.require_subcommand(1);

  std::string task = "inline-size", out, corpus, template_path, slots_text;
  std::string policy, metric, trace_path, config_path, manifest_path, store_path;
  int size = 20;
  uint64_t seed = 0;

  CLI::App* gen = app.add_subcommand("gen", "generate a task corpus");
  gen->add_option("--task", task, "inline-size|inline-perf|egraph|shard");
  gen->add_option("--size", size, "number of corpus items");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output corpus file")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate a policy template");
  eval->add_option("--task", task, "task id");
  eval->add_option("--corpus", corpus, "corpus file")->required();
  eval->add_option("--template", template_path, "template file")->required();
  eval->add_option("--slots", slots_text, "name=value,... slot overrides");

  CLI::App* replay = app.add_subcommand("replay", "replay a reference policy");
  replay->add_option("--policy", policy, "size-a|perf-b|never|always")->required();
  replay->add_option("--metric", metric, "size|perf (defaults per policy)");
  replay->add_option("--corpus", corpus, "corpus file")->required();
  replay->add_option("--trace", trace_path, "trace JSONL output file");

  CLI::App* runc = app.add_subcommand("run", "run the evolution loop");
  runc->add_option("--config", config_path, "key=value config file");
  runc->add_option("--manifest", manifest_path, "re-run from a manifest");
  runc->add_option("--corpus", corpus, "corpus file");
  runc->add_option("--out", out, "output directory")->required();

  CLI::App* curvec = app.add_subcommand("curve", "curve CSV from a store");
  curvec->add_option("--store", store_path, "candidates.jsonl file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(task, size, seed, out);
    if (eval->parsed()) return cmd_eval(task, corpus, template_path, slots_text);
    if (replay->parsed()) return cmd_replay(policy, metric, corpus, trace_path);
    if (runc->parsed()) return cmd_run(config_path, manifest_path, corpus, out);
    if (curvec->parsed()) return cmd_curve(store_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::Internal ? 3 : 2;
  } catch (const json::exception& e) {
    std::cerr << "BadInput: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "Internal: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
