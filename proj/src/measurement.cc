#include "lmsig/measurement.h"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace lmsig {

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

double normalized_edit_distance(std::string_view a, std::string_view b,
                                EditGranularity granularity) {
  std::size_t dist = 0;
  std::size_t norm = 0;
  if (granularity == EditGranularity::kWord) {
    const auto wa = split_words(a);
    const auto wb = split_words(b);
    dist = levenshtein(wa, wb);
    norm = std::max(wa.size(), wb.size());
  } else {
    dist = levenshtein(a, b);
    norm = std::max(a.size(), b.size());
  }
  if (norm == 0) return 0.0;
  return static_cast<double>(dist) / static_cast<double>(norm);
}

double min_worker_edit_distance(std::string_view proposal,
                                std::span<const std::string> other_proposals,
                                EditGranularity granularity) {
  double best = 1.0;
  for (const auto& other : other_proposals)
    best = std::min(best, normalized_edit_distance(proposal, other, granularity));
  return best;
}

void CriteriaVector::validate() const {
  auto ternary = [](int v) { return v >= 0 && v <= 2; };
  if (!std::all_of(custom.begin(), custom.end(), ternary) ||
      !std::all_of(generic.begin(), generic.end(), ternary))
    throw std::invalid_argument("criteria entries must be 0, 1 or 2");
}

double aggregate_signal(const CriteriaVector& criteria, double d_edit) {
  criteria.validate();
  if (!(d_edit >= 0.0 && d_edit <= 1.0)) throw std::invalid_argument("d_edit must lie in [0, 1]");
  const int custom = std::accumulate(criteria.custom.begin(), criteria.custom.end(), 0);
  const int generic = std::accumulate(criteria.generic.begin(), criteria.generic.end(), 0);
  const int kept_custom = d_edit >= kCopyPasteThreshold ? custom : 0;
  return 18.0 / 28.0 * static_cast<double>(2 * kept_custom + generic);
}

std::string_view to_string(EffortRejection r) {
  switch (r) {
    case EffortRejection::kNegative: return "Negative";
    case EffortRejection::kMissing: return "Missing";
    case EffortRejection::kTooLong: return "TooLong";
    case EffortRejection::kTooShort: return "TooShort";
  }
  return "?";
}

std::optional<EffortRejection> parse_effort_rejection(std::string_view s) {
  for (auto r : {EffortRejection::kNegative, EffortRejection::kMissing, EffortRejection::kTooLong,
                 EffortRejection::kTooShort})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

EffortMeasurement validate_effort(std::optional<std::int64_t> first_view_ms,
                                  std::int64_t submitted_ms) {
  constexpr std::int64_t kMinMs = 4'000;
  constexpr std::int64_t kMaxMs = 12 * 60'000;
  if (!first_view_ms) return {std::nullopt, EffortRejection::kMissing};
  const std::int64_t elapsed = submitted_ms - *first_view_ms;
  if (elapsed < 0) return {std::nullopt, EffortRejection::kNegative};
  if (elapsed < kMinMs) return {std::nullopt, EffortRejection::kTooShort};
  if (elapsed > kMaxMs) return {std::nullopt, EffortRejection::kTooLong};
  return {static_cast<double>(elapsed) / 60'000.0, std::nullopt};
}

}  // namespace lmsig
