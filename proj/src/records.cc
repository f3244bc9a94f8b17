#include "lmsig/records.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

namespace lmsig {
namespace {

using nlohmann::json;

class Fields {
 public:
  Fields(const json& j, std::size_t line) : j_(j), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw SchemaError("line " + std::to_string(line_) + ": field '" + field + "' " + what);
  }

  const json& get(const char* name) const {
    auto it = j_.find(name);
    if (it == j_.end()) fail(name, "is missing");
    return *it;
  }
  bool has(const char* name) const {
    auto it = j_.find(name);
    return it != j_.end() && !it->is_null();
  }

  std::string str(const char* name) const {
    const auto& v = get(name);
    if (!v.is_string()) fail(name, "must be a string");
    return v.get<std::string>();
  }
  double num(const char* name) const {
    const auto& v = get(name);
    if (!v.is_number()) fail(name, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(name, "must be finite");
    return x;
  }
  std::int64_t integer(const char* name) const {
    const auto& v = get(name);
    if (!v.is_number_integer()) fail(name, "must be an integer");
    return v.get<std::int64_t>();
  }
  bool boolean(const char* name) const {
    const auto& v = get(name);
    if (!v.is_boolean()) fail(name, "must be a boolean");
    return v.get<bool>();
  }
  std::optional<std::int64_t> opt_integer(const char* name) const {
    if (!has(name)) return std::nullopt;
    return integer(name);
  }
  std::optional<double> opt_num(const char* name) const {
    if (!has(name)) return std::nullopt;
    return num(name);
  }

  template <std::size_t N>
  std::array<int, N> ternary(const char* name) const {
    const auto& v = get(name);
    if (!v.is_array() || v.size() != N) fail(name, "must be an array of " + std::to_string(N));
    std::array<int, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number_integer()) fail(name, "entries must be integers");
      out[i] = v[i].get<int>();
      if (out[i] < 0 || out[i] > 2) fail(name, "entries must be 0, 1 or 2");
    }
    return out;
  }

 private:
  const json& j_;
  std::size_t line_;
};

json hidden_to_json(const HiddenRecord& h) {
  return {{"job_id", h.job_id},
          {"worker_id", h.worker_id},
          {"cost", h.cost},
          {"ability", h.ability},
          {"effort", h.effort},
          {"noise", h.noise},
          {"perceived_ability", h.perceived_ability},
          {"considered", h.considered},
          {"abandoned", h.abandoned}};
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(std::move(line));
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

ApplicationRecord parse_application(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError("line " + std::to_string(line_no) + ": not valid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw SchemaError("line " + std::to_string(line_no) + ": not a JSON object");
  const Fields f(j, line_no);
  ApplicationRecord r;
  r.job_id = f.str("job_id");
  r.worker_id = f.str("worker_id");
  r.bid = f.num("bid");
  r.criteria.custom = f.ternary<5>("criteria_custom");
  r.criteria.generic = f.ternary<4>("criteria_generic");
  r.d_edit = f.num("d_edit");
  if (r.d_edit < 0 || r.d_edit > 1) f.fail("d_edit", "must lie in [0, 1]");
  (void)f.get("first_view_ms");
  r.first_view_ms = f.opt_integer("first_view_ms");
  r.submitted_ms = f.integer("submitted_ms");
  ObservableGroup og;
  if (auto c = parse_country(f.str("country_group"))) og.country = *c;
  else f.fail("country_group", "has an unknown value");
  if (auto a = parse_arrival(f.str("arrival_group"))) og.arrival = *a;
  else f.fail("arrival_group", "has an unknown value");
  if (auto p = parse_reputation(f.str("reputation_group"))) og.reputation = *p;
  else f.fail("reputation_group", "has an unknown value");
  if (!is_valid(og)) f.fail("arrival_group", "is not valid for this country_group");
  r.group = group_id(og);
  r.engaged = f.boolean("engaged");
  r.messages = static_cast<int>(f.integer("messages"));
  if (r.messages < 0) f.fail("messages", "must be nonnegative");
  (void)f.get("rank_at_close");
  if (auto rank = f.opt_integer("rank_at_close")) {
    if (*rank < 1) f.fail("rank_at_close", "must be at least 1");
    r.rank_at_close = static_cast<int>(*rank);
  }

  if (f.has("won")) r.won = f.boolean("won");
  r.job_posted_ms = f.opt_integer("job_posted_ms");
  r.engaged_ms = f.opt_integer("engaged_ms");
  r.signal = f.opt_num("signal");
  r.effort_minutes = f.opt_num("effort_minutes");
  if (f.has("effort_rejection")) {
    r.effort_rejection = parse_effort_rejection(f.str("effort_rejection"));
    if (!r.effort_rejection) f.fail("effort_rejection", "has an unknown value");
  }
  if (f.has("considered")) r.considered = f.boolean("considered");
  r.effort_corrected = f.opt_num("effort_corrected");
  r.c_hat = f.opt_num("c_hat");
  r.a_hat = f.opt_num("a_hat");
  if (f.has("type_reject")) r.type_reject = f.str("type_reject");
  return r;
}

std::string format_application(const ApplicationRecord& r) {
  const auto og = group_from_id(r.group);
  json j = json::object();
  j["job_id"] = r.job_id;
  j["worker_id"] = r.worker_id;
  j["bid"] = r.bid;
  j["criteria_custom"] = r.criteria.custom;
  j["criteria_generic"] = r.criteria.generic;
  j["d_edit"] = r.d_edit;
  j["first_view_ms"] = r.first_view_ms ? json(*r.first_view_ms) : json(nullptr);
  j["submitted_ms"] = r.submitted_ms;
  j["country_group"] = to_string(og.country);
  j["arrival_group"] = to_string(og.arrival);
  j["reputation_group"] = to_string(og.reputation);
  j["engaged"] = r.engaged;
  j["messages"] = r.messages;
  j["rank_at_close"] = r.rank_at_close ? json(*r.rank_at_close) : json(nullptr);
  j["won"] = r.won;
  if (r.job_posted_ms) j["job_posted_ms"] = *r.job_posted_ms;
  if (r.engaged_ms) j["engaged_ms"] = *r.engaged_ms;
  if (r.signal) j["signal"] = *r.signal;
  if (r.effort_minutes) j["effort_minutes"] = *r.effort_minutes;
  if (r.effort_rejection) j["effort_rejection"] = to_string(*r.effort_rejection);
  if (r.considered) j["considered"] = *r.considered;
  if (r.effort_corrected) j["effort_corrected"] = *r.effort_corrected;
  if (r.c_hat) j["c_hat"] = *r.c_hat;
  if (r.a_hat) j["a_hat"] = *r.a_hat;
  if (!r.type_reject.empty()) j["type_reject"] = r.type_reject;
  return j.dump();
}

std::vector<ApplicationRecord> read_applications(const std::string& path) {
  std::vector<ApplicationRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) out.push_back(parse_application(line, ++n));
  return out;
}

void write_applications(const std::string& path, const std::vector<ApplicationRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(format_application(r));
  write_lines(path, lines);
}

std::vector<HiddenRecord> read_hidden(const std::string& path) {
  std::vector<HiddenRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    const json j = json::parse(line);
    const Fields f(j, ++n);
    HiddenRecord h;
    h.job_id = f.str("job_id");
    h.worker_id = f.str("worker_id");
    h.cost = f.num("cost");
    h.ability = f.num("ability");
    h.effort = f.num("effort");
    h.noise = f.num("noise");
    h.perceived_ability = f.num("perceived_ability");
    h.considered = f.boolean("considered");
    h.abandoned = f.boolean("abandoned");
    out.push_back(std::move(h));
  }
  return out;
}

void write_hidden(const std::string& path, const std::vector<HiddenRecord>& records) {
  std::vector<std::string> lines;
  for (const auto& h : records) lines.push_back(hidden_to_json(h).dump());
  write_lines(path, lines);
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_job(
    const std::vector<ApplicationRecord>& records) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(records[i].job_id, out.size());
    if (fresh) out.push_back({records[i].job_id, {}});
    out[it->second].second.push_back(i);
  }
  return out;
}

CriteriaVector synthetic_criteria(double signal) {
  const double s = std::clamp(signal, 0.0, 18.0);
  const int units = static_cast<int>(std::lround(s * 28.0 / 18.0));
  int custom = std::min(10, units / 2);
  int generic = units - 2 * custom;
  CriteriaVector cv;
  for (auto& v : cv.custom) {
    v = std::min(2, custom);
    custom -= v;
  }
  for (auto& v : cv.generic) {
    v = std::min(2, generic);
    generic -= v;
  }
  return cv;
}

SyntheticData records_from_market(const std::vector<SimJob>& jobs, std::uint64_t seed) {
  constexpr std::int64_t kBase = 1'700'000'000'000;
  constexpr std::int64_t kMinute = 60'000;
  SyntheticData out;
  for (std::size_t m = 0; m < jobs.size(); ++m) {
    const SimJob& job = jobs[m];
    Rng rng = Rng::stream(seed, "clicks", m);
    const std::int64_t posted = kBase + static_cast<std::int64_t>(m) * 1440 * kMinute;
    const std::size_t n = job.applications.size();
    std::vector<std::int64_t> submitted(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double minutes =
          job.applications[i].considered ? rng.uniform(1.0, 90.0) : rng.uniform(121.0, 600.0);
      submitted[i] = posted + static_cast<std::int64_t>(std::llround(minutes * kMinute));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return submitted[x] < submitted[y];
    });
    std::vector<int> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = static_cast<int>(k) + 1;

    for (std::size_t i = 0; i < n; ++i) {
      const SimApplication& a = job.applications[i];
      ApplicationRecord r;
      r.job_id = job.job_id;
      r.worker_id = a.worker_id;
      r.bid = a.bid;
      r.criteria = synthetic_criteria(a.signal);
      r.d_edit = 1.0;
      r.submitted_ms = submitted[i];
      r.first_view_ms = submitted[i] - static_cast<std::int64_t>(std::llround(a.measured * kMinute));
      r.group = a.group;
      r.engaged = a.considered;
      r.messages = a.won ? 3 : 0;
      r.rank_at_close = rank[i];
      r.won = a.won;
      r.job_posted_ms = posted;
      if (a.considered) r.engaged_ms = posted + 660 * kMinute;
      r.signal = a.signal;
      out.records.push_back(std::move(r));
      out.hidden.push_back({job.job_id, a.worker_id, a.cost, a.ability, a.effort, a.noise,
                            a.perceived_ability, a.considered, job.abandoned});
    }
  }
  return out;
}

std::vector<JobClicks> clicks_from_records(const std::vector<ApplicationRecord>& records) {
  std::vector<JobClicks> out;
  for (const auto& [job_id, idx] : group_by_job(records)) {
    JobClicks jc;
    jc.job_id = job_id;
    std::int64_t earliest = records[idx.front()].submitted_ms;
    std::optional<std::int64_t> posted;
    for (std::size_t i : idx) {
      const auto& r = records[i];
      earliest = std::min(earliest, r.submitted_ms);
      if (r.job_posted_ms) posted = r.job_posted_ms;
      ClickRecord c;
      c.worker_id = r.worker_id;
      c.submitted_ms = r.submitted_ms;
      c.first_view_ms = r.first_view_ms;
      c.employer_engaged = r.engaged;
      c.messages_count = r.messages;
      c.rank_at_close = r.rank_at_close;
      c.hired = r.won;
      c.engaged_ms = r.engaged_ms;
      jc.applications.push_back(std::move(c));
    }
    jc.posted_ms = posted.value_or(earliest);
    out.push_back(std::move(jc));
  }
  return out;
}

}  // namespace lmsig
