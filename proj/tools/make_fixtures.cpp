// Regenerates fixtures/: recorded demos, scene files and example configs.
// Usage: make_fixtures OUT_DIR

#include <filesystem>
#include <iostream>

#include "meip/harness/experiments.hpp"

using namespace meip;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures OUT_DIR\n";
    return 2;
  }
  namespace fs = std::filesystem;
  const fs::path root = argv[1];
  fs::create_directories(root / "demos");
  fs::create_directories(root / "scenes");
  fs::create_directories(root / "configs");

  write_demos((root / "demos" / "folding.jsonl").string(), scripted_fold_records());

  std::vector<DemoRecord> did;
  json ddesc = normalize_descriptor({{"kind", "didactic"}, {"p", 0.1}});
  for (auto& p : didactic_demos(0.1, 5, 5)) did.push_back({p.problem_id(), ddesc, std::move(p)});
  write_demos((root / "demos" / "didactic.jsonl").string(), did);

  std::vector<DemoRecord> rit;
  RitualEnv renv;
  json rdesc = normalize_descriptor({{"kind", "ritual"}});
  for (auto& p : ritual_demos(renv)) rit.push_back({p.problem_id(), rdesc, std::move(p)});
  write_demos((root / "demos" / "ritual.jsonl").string(), rit);

  for (const char* g : {"square", "rectangle", "shirt", "sweater"})
    write_json_file((root / "scenes" / (std::string(g) + ".json")).string(), fold::fixture_description(g));

  auto exp = default_experiment_config("ritual");
  write_json_file((root / "configs" / "ritual_learn.json").string(),
                  {{"concepts", exp["concepts"]}, {"learner", exp["learner"]}, {"planner", exp["planner"]},
                   {"maxent", exp["maxent"]}});
  write_json_file((root / "configs" / "ritual_pursuit.json").string(),
                  {{"learner", {{"max_iterations", 5}}},
                   {"planner", {{"iterations", 500}, {"inverse_temperature", 5.0}}},
                   {"pursuit",
                    {{"epsilon", 0.02},
                     {"enumeration",
                      {{"fluents", {"picked"}},
                       {"negations", false},
                       {"restricted_domains", false},
                       {"filters", {{"object", {"torch", "bamboo", "clay"}}, {"stage", {"S1", "S2", "S3"}}}}}}}}});
  auto fexp = default_experiment_config("folding");
  write_json_file((root / "configs" / "folding_learn.json").string(),
                  {{"concepts", fexp["concepts"]}, {"bins", fexp["bins"]}, {"learner", fexp["learner"]},
                   {"planner", fexp["planner"]}});
  write_json_file((root / "configs" / "serve.json").string(),
                  {{"demo_store", "demos.jsonl"}, {"model_dir", "models"}, {"max_folds", 8}, {"replay_folds", 3},
                   {"planner", {{"iterations", 3000}, {"inverse_temperature", 10.0}}}});
  std::cout << "fixtures written to " << root << '\n';
  return 0;
}
