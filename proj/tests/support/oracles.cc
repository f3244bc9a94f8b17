#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmsig/model.h"

namespace oracle {

std::size_t dp_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t best = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, d[i - 1][j] + 1);
      best = std::min(best, d[i][j - 1] + 1);
      d[i][j] = best;
    }
  }
  return d[n][m];
}

std::vector<double> exhaustive_isotonic(const std::vector<int>& y) {
  const int n = static_cast<int>(y.size());
  if (n == 0) return {};
  // Squared error scaled by 840 = lcm(1..8) stays an integer for n <= 8.
  const std::int64_t scale = 840;
  std::int64_t best_err = -1;
  std::vector<double> best;
  for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    // bit k set: a block ends after position k
    std::vector<std::pair<int, int>> blocks;  // [start, end)
    int start = 0;
    for (int k = 0; k < n; ++k) {
      if (k == n - 1 || (cuts >> k & 1u)) {
        blocks.push_back({start, k + 1});
        start = k + 1;
      }
    }
    bool monotone = true;
    std::int64_t err = 0;
    std::int64_t prev_sum = 0, prev_len = 0;
    for (const auto& [s, e] : blocks) {
      std::int64_t sum = 0, sq = 0;
      for (int i = s; i < e; ++i) {
        sum += y[i];
        sq += std::int64_t(y[i]) * y[i];
      }
      const std::int64_t len = e - s;
      // block mean must not fall below the previous one: sum/len >= prev_sum/prev_len
      if (prev_len > 0 && sum * prev_len < prev_sum * len) monotone = false;
      err += scale * sq - (scale / len) * sum * sum;
      prev_sum = sum;
      prev_len = len;
    }
    if (!monotone) continue;
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best.clear();
      for (const auto& [s, e] : blocks) {
        double sum = 0;
        for (int i = s; i < e; ++i) sum += y[i];
        best.insert(best.end(), e - s, sum / (e - s));
      }
    }
  }
  return best;
}

namespace {

constexpr std::int64_t kMin = 60'000;

bool interacted(const lmsig::ClickRecord& r) {
  return r.hired || r.messages_count >= 2 || r.employer_engaged;
}

}  // namespace

ReferenceConsideration reference_consideration(const std::vector<lmsig::JobClicks>& jobs) {
  ReferenceConsideration out;

  struct Work {
    const lmsig::JobClicks* job;
    std::vector<int> points;
    std::vector<bool> first_point;  // interaction point
    std::vector<bool> flag;
    std::vector<int> arrival_order;  // application indices by submission
  };
  std::vector<Work> work;

  // Step 1
  for (const auto& job : jobs) {
    bool complete = true;
    for (const auto& r : job.applications) complete = complete && r.rank_at_close.has_value();
    if (!complete) {
      out.dropped.push_back(job.job_id);
      continue;
    }
    Work w;
    w.job = &job;
    const int n = static_cast<int>(job.applications.size());
    w.arrival_order.resize(n);
    std::iota(w.arrival_order.begin(), w.arrival_order.end(), 0);
    std::stable_sort(w.arrival_order.begin(), w.arrival_order.end(), [&](int x, int y) {
      const auto& rx = job.applications[x];
      const auto& ry = job.applications[y];
      if (rx.submitted_ms < ry.submitted_ms) return true;
      if (rx.submitted_ms > ry.submitted_ms) return false;
      return *rx.rank_at_close < *ry.rank_at_close;
    });

    int in_five = 0;
    for (const auto& r : job.applications)
      if (r.submitted_ms - job.posted_ms <= 5 * kMin) in_five++;

    int latest = -1;  // last interacted application in arrival order
    for (int k = 0; k < n; ++k)
      if (interacted(job.applications[w.arrival_order[k]])) latest = w.arrival_order[k];

    for (int i = 0; i < n; ++i) {
      const auto& r = job.applications[i];
      const auto age = r.submitted_ms - job.posted_ms;
      int arrival_pos = 0;
      while (w.arrival_order[arrival_pos] != i) arrival_pos++;
      int pts = 0;
      const bool p1 = interacted(r);
      if (p1) pts++;
      if (arrival_pos < 8 && age <= 120 * kMin) pts++;
      if (*r.rank_at_close <= 8 && age <= 120 * kMin) pts++;
      if (age <= 5 * kMin && in_five < 30) pts++;
      if (latest >= 0 && latest != i) {
        const auto& ref = job.applications[latest];
        int ref_rank = *ref.rank_at_close;
        if (ref.engaged_rank_reference) ref_rank = *ref.engaged_rank_reference;
        bool present = true;
        if (ref.engaged_ms) present = r.submitted_ms <= *ref.engaged_ms;
        if (present && *r.rank_at_close < ref_rank) pts++;
      }
      w.points.push_back(pts);
      w.first_point.push_back(p1);
      w.flag.push_back(pts >= 1);
    }
    work.push_back(std::move(w));
  }

  auto count = [](const Work& w) {
    int c = 0;
    for (bool f : w.flag) c += f ? 1 : 0;
    return c;
  };

  // Step 2: nearest-rank 75th percentile of set sizes.
  int p75 = 0;
  if (!work.empty()) {
    std::vector<int> sizes;
    for (const auto& w : work) sizes.push_back(count(w));
    std::sort(sizes.begin(), sizes.end());
    const double pos = std::ceil(0.75 * sizes.size());
    p75 = sizes[static_cast<std::size_t>(pos) - 1];
  }

  for (auto& w : work) {
    const auto& apps = w.job->applications;
    const int n = static_cast<int>(apps.size());
    auto age = [&](int i) { return apps[i].submitted_ms - w.job->posted_ms; };

    if (count(w) > p75)
      for (int i = 0; i < n; ++i)
        if (w.points[i] == 1 && !w.first_point[i]) w.flag[i] = false;

    // 3a
    if (count(w) < 5 && n > 15)
      for (int i = 0; i < n; ++i)
        if (*apps[i].rank_at_close <= 16) w.flag[i] = true;
    // 3b
    if (count(w) < 5 && n < 9)
      for (int i = 0; i < n; ++i)
        if (age(i) <= 12 * 60 * kMin) w.flag[i] = true;
    // 3c
    if (count(w) < 3)
      for (int i = 0; i < n; ++i)
        if (*apps[i].rank_at_close <= 8 && age(i) <= 12 * 60 * kMin) w.flag[i] = true;
    // 3d
    if (count(w) < 3 && n < 8)
      for (int i = 0; i < n; ++i) w.flag[i] = true;
    // 3e
    if (count(w) < 3)
      for (int k = 0; k < n && k < 5; ++k) w.flag[w.arrival_order[k]] = true;

    // 4a-4d
    for (int s = 1; s <= 4; ++s) {
      if (count(w) <= 32) break;
      for (int i = 0; i < n; ++i)
        if (w.points[i] == s && !w.first_point[i]) w.flag[i] = false;
    }
    // 4e
    if (count(w) > 32)
      for (int i = 0; i < n; ++i)
        if (w.points[i] == 4 && apps[i].messages_count < 5 && !apps[i].hired) w.flag[i] = false;
  }

  // Step 5
  for (auto& w : work) {
    bool hired = false;
    for (const auto& r : w.job->applications) hired = hired || r.hired;
    if (count(w) > 32 && !hired) {
      out.dropped.push_back(w.job->job_id);
      continue;
    }
    out.kept.push_back({w.job->job_id, w.flag});
  }
  return out;
}

std::vector<lmsig::JobClicks> click_corpus(int n_jobs, std::uint64_t seed) {
  lmsig::Rng rng(seed);
  std::vector<lmsig::JobClicks> jobs;
  for (int j = 0; j < n_jobs; ++j) {
    lmsig::JobClicks job;
    job.job_id = "c" + std::to_string(j);
    job.posted_ms = 1'700'000'000'000 + std::int64_t(j) * 86'400'000;
    const int kind = j % 8;
    int n = 0;
    switch (kind) {
      case 0: n = 1 + int(rng.index(7)); break;    // tiny
      case 1: n = 9 + int(rng.index(8)); break;    // small
      case 2: n = 16 + int(rng.index(20)); break;  // mid
      case 3: n = 40 + int(rng.index(40)); break;  // crowded early
      case 4: n = 50 + int(rng.index(60)); break;  // deep scroll
      case 5: n = 35 + int(rng.index(30)); break;  // chatty
      default: n = 5 + int(rng.index(40)); break;
    }
    for (int i = 0; i < n; ++i) {
      lmsig::ClickRecord r;
      r.worker_id = "w" + std::to_string(rng.index(500));
      std::int64_t minutes = 0;
      if (kind == 3) minutes = std::int64_t(rng.index(8));
      else if (kind == 0 && rng.bernoulli(0.3)) minutes = 700 + std::int64_t(rng.index(600));
      else minutes = std::int64_t(rng.index(900));
      // same-minute submissions create timestamp ties
      r.submitted_ms = job.posted_ms + minutes * kMin + (rng.bernoulli(0.5) ? 0 : std::int64_t(rng.index(59'000)));
      r.first_view_ms = r.submitted_ms - 120'000;
      const double p_engage = kind == 4 ? 0.6 : kind == 5 ? 0.5 : 0.12;
      r.employer_engaged = rng.bernoulli(p_engage);
      r.messages_count = kind == 5 ? int(rng.index(8)) : (rng.bernoulli(0.1) ? int(rng.index(4)) : 0);
      job.applications.push_back(r);
    }
    // Ranks: a random permutation, partly aligned with submission order.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    for (int i = 0; i < n; ++i) job.applications[i].rank_at_close = perm[i];
    // Hire one considered-looking application most of the time.
    if (n > 0 && !(kind == 4 && j % 16 == 4) && rng.bernoulli(0.7)) {
      auto& h = job.applications[rng.index(n)];
      h.hired = true;
    }
    for (auto& r : job.applications) {
      if (r.employer_engaged || r.hired || r.messages_count >= 2) {
        r.engaged_ms = r.submitted_ms + std::int64_t(rng.index(600)) * kMin;
        if (rng.bernoulli(0.5)) r.engaged_rank_reference = 1 + int(rng.index(n));
      }
    }
    if (j % 37 == 5 && n > 0) job.applications[rng.index(n)].rank_at_close.reset();
    jobs.push_back(std::move(job));
  }
  return jobs;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

lmsig::SurfacePoint LogitSurface::eval(double b, double e, lmsig::GroupId) const {
  const double w = std::exp(h0_ + g_ * std::log(e) + alpha_ * b);
  const double d = 1 + w + wc_;
  const double dp_dw = pi_ * (1 + wc_) / (d * d);
  return {pi_ * w / d, dp_dw * alpha_ * w, dp_dw * g_ * w / e};
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& steps) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += steps[i];
    xm[i] -= steps[i];
    g[i] = (f(xp) - f(xm)) / (2 * steps[i]);
  }
  return g;
}

double payoff(const lmsig::WinSurface& s, lmsig::GroupId g, double b, double e, double c,
              double a) {
  return s.eval(b, e, g).p * (b - c) - e * e / (2 * std::exp(a));
}

std::pair<double, double> grid_argmax(const lmsig::WinSurface& s, lmsig::GroupId g, double c,
                                      double a, int n, int rounds) {
  double b_lo = lmsig::kMinBid, b_hi = lmsig::kMaxBid;
  double u_lo = std::log(lmsig::kEffortFloor), u_hi = std::log(lmsig::kMaxEffort);
  double best_b = b_hi, best_u = u_lo;
  for (int r = 0; r < rounds; ++r) {
    const double db = (b_hi - b_lo) / (n - 1), du = (u_hi - u_lo) / (n - 1);
    double best = -1e300;
    for (int i = 0; i < n; ++i) {
      const double b = b_lo + i * db;
      for (int k = 0; k < n; ++k) {
        const double u = u_lo + k * du;
        const double v = payoff(s, g, b, std::exp(u), c, a);
        if (v > best) {
          best = v;
          best_b = b;
          best_u = u;
        }
      }
    }
    b_lo = std::max(lmsig::kMinBid, best_b - 4 * db);
    b_hi = std::min(lmsig::kMaxBid, best_b + 4 * db);
    u_lo = std::max(std::log(lmsig::kEffortFloor), best_u - 4 * du);
    u_hi = std::min(std::log(lmsig::kMaxEffort), best_u + 4 * du);
  }
  return {best_b, std::exp(best_u)};
}

}  // namespace oracle
