#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lmsig/consideration.h"
#include "lmsig/counterfactual.h"
#include "lmsig/demand.h"
#include "lmsig/generator.h"
#include "lmsig/serialize.h"

namespace lmsig {

// A stage could not run: a declared input is missing or a setting is unusable.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<std::string> stages;     // empty runs every stage in order
  std::optional<std::string> input;    // application JSONL; defaults to the simulate output
  std::optional<std::string> hidden;   // sidecar with simulated truth, same order as input
  Era era = Era::kPreLlm;

  // simulate
  GeneratorConfig generator;
  int n_jobs = 2000;

  // "simulated" takes the flags from the sidecar; "clicks" runs the click-based algorithm.
  std::string consideration_source = "simulated";
  ConsiderationConfig consideration;

  int pool_size = 5000;  // M
  int n_bins = 50;
  double effort_cap = 1.25;
  DemandFitOptions demand;
  SolverConfig solver;
  int counterfactual_jobs = 20000;

  std::string path(const std::string& file) const;
  Json to_json() const;
};

PipelineConfig config_from_json(const Json& j);
PipelineConfig load_config(const std::string& path);

// simulate, measure, consider, fit-reduced, fit-copula, build-pool, invert-supply,
// fit-beliefs, fit-demand, counterfactual, report.
const std::vector<std::string>& stage_names();

struct StageResult {
  std::string stage;
  std::vector<std::string> outputs;
  std::vector<std::string> diagnostics;
  double wall_time_s = 0.0;
};

// Runs one stage and appends a line to <out>/manifest.jsonl. Throws StageError
// naming the missing input, or SchemaError naming the offending field.
StageResult run_stage(const std::string& name, const PipelineConfig& cfg);

// Runs cfg.stages (or all stages) in order.
std::vector<StageResult> run_pipeline(const PipelineConfig& cfg);

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

// 64-bit FNV-1a of a byte string (continuing from h) and of a file's bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset);
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t x);

}  // namespace lmsig
