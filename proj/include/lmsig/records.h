#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmsig/consideration.h"
#include "lmsig/groups.h"
#include "lmsig/measurement.h"
#include "lmsig/simulator.h"

namespace lmsig {

// Raised when a record does not match the application schema; the message names
// the line and the offending field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One application line. The first block is the input schema; won, job_posted_ms,
// engaged_ms and signal are optional extensions; the last block is filled by
// downstream stages.
struct ApplicationRecord {
  std::string job_id;
  std::string worker_id;
  double bid = 0.0;
  CriteriaVector criteria;
  double d_edit = 1.0;
  std::optional<std::int64_t> first_view_ms;
  std::int64_t submitted_ms = 0;
  GroupId group;
  bool engaged = false;
  int messages = 0;
  std::optional<int> rank_at_close;

  bool won = false;
  std::optional<std::int64_t> job_posted_ms;
  std::optional<std::int64_t> engaged_ms;
  std::optional<double> signal;  // latent score when the source provides one

  std::optional<double> effort_minutes;
  std::optional<EffortRejection> effort_rejection;
  std::optional<bool> considered;
  std::optional<double> effort_corrected;  // minutes after the worker-level correction
  std::optional<double> c_hat, a_hat;
  std::string type_reject;
};

// Quantities only a simulation knows, keyed by (job_id, worker_id) order.
struct HiddenRecord {
  std::string job_id;
  std::string worker_id;
  double cost = 0.0, ability = 0.0;
  double effort = 0.0;  // true minutes
  double noise = 0.0;
  double perceived_ability = 0.0;
  bool considered = false;
  bool abandoned = false;
};

ApplicationRecord parse_application(std::string_view line, std::size_t line_no = 0);
std::string format_application(const ApplicationRecord& r);
std::vector<ApplicationRecord> read_applications(const std::string& path);
void write_applications(const std::string& path, const std::vector<ApplicationRecord>& records);

std::vector<HiddenRecord> read_hidden(const std::string& path);
void write_hidden(const std::string& path, const std::vector<HiddenRecord>& records);

// Record indices per job, jobs in order of first appearance.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_job(
    const std::vector<ApplicationRecord>& records);

// Rubric answers whose aggregate is the closest attainable score to the clamped signal.
CriteriaVector synthetic_criteria(double signal);

struct SyntheticData {
  std::vector<ApplicationRecord> records;
  std::vector<HiddenRecord> hidden;
};

// Application lines for simulated jobs. Click data are synthesized so that the
// simulated consideration set is what the employer engaged with: those
// applications arrive within 90 minutes, rank first and are opened; the rest
// arrive after two hours.
SyntheticData records_from_market(const std::vector<SimJob>& jobs, std::uint64_t seed);

// Click view of the records. A job's posting time defaults to its earliest submission.
std::vector<JobClicks> clicks_from_records(const std::vector<ApplicationRecord>& records);

}  // namespace lmsig
