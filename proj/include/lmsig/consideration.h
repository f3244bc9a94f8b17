#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lmsig {

enum class Era { kPreLlm, kPostLlm };

// Click, rank and timestamp data for one application.
struct ClickRecord {
  std::string worker_id;
  std::int64_t submitted_ms = 0;
  std::optional<std::int64_t> first_view_ms;
  bool employer_engaged = false;  // employer opened the application
  int messages_count = 0;
  std::optional<int> rank_at_close;
  bool hired = false;
  // Time of the employer's interaction with this application and the rank it held then.
  std::optional<std::int64_t> engaged_ms;
  std::optional<int> engaged_rank_reference;

  int page_at_close() const { return rank_at_close ? (*rank_at_close + 7) / 8 : 0; }
};

struct JobClicks {
  std::string job_id;
  std::int64_t posted_ms = 0;
  std::vector<ClickRecord> applications;
};

struct ConsiderationConfig {
  // Replaces the 75th percentile computed from the jobs passed in, e.g. to apply a
  // percentile established on a full era sample to a subset.
  std::optional<int> size_percentile_override;
  int max_set_size = 32;
};

struct JobConsideration {
  std::string job_id;
  std::vector<bool> considered;  // parallel to JobClicks::applications
  std::vector<int> score;        // number of scoring conditions met
  std::vector<bool> engaged_point;  // whether condition (1) contributed
};

struct ConsiderationResult {
  std::vector<JobConsideration> jobs;  // retained jobs, input order
  std::vector<std::string> dropped_job_ids;
  std::vector<std::string> diagnostics;
  int size_percentile = 0;
};

// Five-step consideration-set construction from click and timestamp data: point
// scoring, percentile trim, four widening passes for small sets, five trimming passes
// for sets above the cap, and removal of oversized jobs that never hired.
ConsiderationResult build_consideration_sets(const std::vector<JobClicks>& jobs, Era era,
                                             const ConsiderationConfig& config = {});

// Nearest-rank percentile (p in (0, 100]) of a non-empty sample.
int nearest_rank_percentile(std::vector<int> values, double p);

}  // namespace lmsig
