// Command-line driver for the staged estimation pipeline.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lmsig/pipeline.h"
#include "lmsig/records.h"

int main(int argc, char** argv) {
  CLI::App app{"Signaling-market simulator, estimator and counterfactual engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> stages;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Master seed; overrides the config");
    cmd->add_option("--out", out, "Output directory; overrides the config");
  };

  auto* run = app.add_subcommand("run", "Run the configured stages, or those given with --stage");
  add_common(run);
  run->add_option("--stage", stages, "Stage to run (repeatable)");
  std::vector<CLI::App*> verbs;
  for (const auto& name : lmsig::stage_names()) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " stage");
    add_common(cmd);
    verbs.push_back(cmd);
  }
  auto* show = app.add_subcommand("show-config", "Print the effective config");
  add_common(show);

  CLI11_PARSE(app, argc, argv);

  try {
    lmsig::PipelineConfig cfg;
    if (!config_path.empty()) cfg = lmsig::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out_dir = *out;

    if (show->parsed()) {
      std::cout << cfg.to_json().dump(1) << '\n';
      return 0;
    }
    std::vector<std::string> todo;
    if (run->parsed()) {
      todo = !stages.empty() ? stages : (cfg.stages.empty() ? lmsig::stage_names() : cfg.stages);
    } else {
      for (auto* v : verbs)
        if (v->parsed()) todo.push_back(v->get_name());
    }
    for (const auto& s : todo) {
      const auto r = lmsig::run_stage(s, cfg);
      std::fprintf(stderr, "[%s] %.1fs", r.stage.c_str(), r.wall_time_s);
      for (const auto& o : r.outputs) std::fprintf(stderr, " %s", o.c_str());
      std::fprintf(stderr, "\n");
      for (const auto& d : r.diagnostics) std::fprintf(stderr, "  %s\n", d.c_str());
    }
  } catch (const lmsig::SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 3;
  } catch (const lmsig::StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
