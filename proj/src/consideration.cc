#include "lmsig/consideration.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lmsig {
namespace {

constexpr std::int64_t kMinute = 60'000;
constexpr std::int64_t kHour = 60 * kMinute;

struct ScoredJob {
  const JobClicks* clicks = nullptr;
  JobConsideration result;
  bool hired_any = false;

  int count() const {
    return static_cast<int>(std::count(result.considered.begin(), result.considered.end(), true));
  }
  std::size_t size() const { return result.considered.size(); }
};

// Submission order with ties broken by closing rank, then input position.
std::vector<std::size_t> submission_order(const JobClicks& job) {
  std::vector<std::size_t> order(job.applications.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = job.applications[x];
    const auto& b = job.applications[y];
    if (a.submitted_ms != b.submitted_ms) return a.submitted_ms < b.submitted_ms;
    return *a.rank_at_close < *b.rank_at_close;
  });
  return order;
}

ScoredJob score_job(const JobClicks& job) {
  ScoredJob sj;
  sj.clicks = &job;
  sj.result.job_id = job.job_id;
  const std::size_t n = job.applications.size();
  sj.result.considered.assign(n, false);
  sj.result.score.assign(n, 0);
  sj.result.engaged_point.assign(n, false);

  const auto order = submission_order(job);
  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) position[order[k]] = k;

  int early_count = 0;
  for (const auto& app : job.applications)
    if (app.submitted_ms - job.posted_ms <= 5 * kMinute) ++early_count;

  // Condition (5) reference: the latest-submitted application the employer
  // interacted with, ordered by (submission time, rank).
  std::optional<std::size_t> reference;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = order[k];
    const auto& app = job.applications[idx];
    if (app.hired || app.messages_count >= 2 || app.employer_engaged) reference = idx;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& app = job.applications[i];
    const std::int64_t since_post = app.submitted_ms - job.posted_ms;
    const bool within_2h = since_post <= 2 * kHour;
    const bool c1 = app.hired || app.messages_count >= 2 || app.employer_engaged;
    const bool c2 = position[i] < 8 && within_2h;
    const bool c3 = app.page_at_close() == 1 && within_2h;
    const bool c4 = since_post <= 5 * kMinute && early_count < 30;
    bool c5 = false;
    if (reference && *reference != i) {
      const auto& ref = job.applications[*reference];
      const int ref_rank = ref.engaged_rank_reference.value_or(*ref.rank_at_close);
      const bool existed = !ref.engaged_ms || app.submitted_ms <= *ref.engaged_ms;
      c5 = existed && *app.rank_at_close < ref_rank;
    }
    sj.result.score[i] = int(c1) + int(c2) + int(c3) + int(c4) + int(c5);
    sj.result.engaged_point[i] = c1;
    sj.result.considered[i] = sj.result.score[i] > 0;
    if (app.hired) sj.hired_any = true;
  }
  return sj;
}

template <typename Pred>
void set_where(ScoredJob& sj, bool value, Pred pred) {
  for (std::size_t i = 0; i < sj.size(); ++i)
    if (pred(i)) sj.result.considered[i] = value;
}

}  // namespace

int nearest_rank_percentile(std::vector<int> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * double(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

ConsiderationResult build_consideration_sets(const std::vector<JobClicks>& jobs, Era era,
                                             const ConsiderationConfig& config) {
  ConsiderationResult out;
  std::vector<ScoredJob> scored;
  scored.reserve(jobs.size());
  for (const auto& job : jobs) {
    const bool rank_missing =
        std::any_of(job.applications.begin(), job.applications.end(),
                    [](const ClickRecord& r) { return !r.rank_at_close.has_value(); });
    if (rank_missing) {
      out.dropped_job_ids.push_back(job.job_id);
      out.diagnostics.push_back("job " + job.job_id + ": missing rank_at_close, excluded");
      continue;
    }
    scored.push_back(score_job(job));
  }

  // Step 2: percentile trim, era-specific.
  if (!scored.empty()) {
    std::vector<int> sizes;
    sizes.reserve(scored.size());
    for (const auto& sj : scored) sizes.push_back(sj.count());
    out.size_percentile = config.size_percentile_override.value_or(nearest_rank_percentile(sizes, 75.0));
  }
  (void)era;
  const int cap = config.max_set_size;

  for (auto& sj : scored) {
    const auto& apps = sj.clicks->applications;
    const auto& score = sj.result.score;
    const auto& c1 = sj.result.engaged_point;
    const int total = static_cast<int>(sj.size());
    const std::int64_t posted = sj.clicks->posted_ms;
    auto within = [&](std::size_t i, std::int64_t span) {
      return apps[i].submitted_ms - posted <= span;
    };

    if (sj.count() > out.size_percentile)
      set_where(sj, false, [&](std::size_t i) { return score[i] == 1 && !c1[i]; });

    // Step 3a-3e: widen small sets.
    if (sj.count() < 5 && total > 15)
      set_where(sj, true, [&](std::size_t i) { return *apps[i].rank_at_close <= 16; });
    if (sj.count() < 5 && total < 9)
      set_where(sj, true, [&](std::size_t i) { return within(i, 12 * kHour); });
    if (sj.count() < 3)
      set_where(sj, true,
                [&](std::size_t i) { return apps[i].page_at_close() == 1 && within(i, 12 * kHour); });
    if (sj.count() < 3 && total < 8) set_where(sj, true, [](std::size_t) { return true; });
    if (sj.count() < 3) {
      const auto order = submission_order(*sj.clicks);
      for (std::size_t k = 0; k < order.size() && k < 5; ++k) sj.result.considered[order[k]] = true;
    }

    // Step 4a-4e: trim oversized sets. Hired applications are never trimmed.
    for (int s = 1; s <= 4; ++s)
      if (sj.count() > cap)
        set_where(sj, false, [&](std::size_t i) { return score[i] == s && !c1[i]; });
    if (sj.count() > cap)
      set_where(sj, false, [&](std::size_t i) {
        return score[i] == 4 && apps[i].messages_count < 5 && !apps[i].hired;
      });
  }

  // Step 5: drop oversized jobs that never hired.
  for (auto& sj : scored) {
    if (sj.count() > cap && !sj.hired_any) {
      out.dropped_job_ids.push_back(sj.result.job_id);
      out.diagnostics.push_back("job " + sj.result.job_id + ": " + std::to_string(sj.count()) +
                                " considered applications and no hire, dropped");
      continue;
    }
    out.jobs.push_back(std::move(sj.result));
  }
  return out;
}

}  // namespace lmsig
