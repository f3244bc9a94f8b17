#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmsig {

enum class EditGranularity { kWord, kCharacter };

// Splits on ASCII whitespace; empty tokens are dropped.
std::vector<std::string_view> split_words(std::string_view text);

// Unit-cost insert/delete/substitute distance between two sequences, O(min(n,m)) memory.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  const Seq& longer = a.size() >= b.size() ? a : b;
  const Seq& shorter = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1);
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = i;
  for (std::size_t j = 1; j <= longer.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= shorter.size(); ++i) {
      const std::size_t up = row[i];
      const std::size_t sub = diag + (shorter[i - 1] == longer[j - 1] ? 0 : 1);
      row[i] = std::min({sub, up + 1, row[i - 1] + 1});
      diag = up;
    }
  }
  return row[shorter.size()];
}

// Levenshtein(a, b) / max(len a, len b) with lengths counted in the chosen units;
// 0 when both are empty.
double normalized_edit_distance(std::string_view a, std::string_view b,
                                EditGranularity granularity = EditGranularity::kWord);

// Minimum normalized distance to any other proposal by the same worker; 1 when there is none.
double min_worker_edit_distance(std::string_view proposal,
                                std::span<const std::string> other_proposals,
                                EditGranularity granularity = EditGranularity::kWord);

// Ternary rubric answers: five customization criteria and four generic ones.
struct CriteriaVector {
  std::array<int, 5> custom{};
  std::array<int, 4> generic{};

  // Throws std::invalid_argument when an entry is outside {0, 1, 2}.
  void validate() const;
};

inline constexpr double kCopyPasteThreshold = 0.04;

// (18/28) * (2 * sum(custom) * 1{d_edit >= 0.04} + sum(generic)), in [0, 18].
double aggregate_signal(const CriteriaVector& criteria, double d_edit);

enum class EffortRejection { kNegative, kMissing, kTooLong, kTooShort };

std::string_view to_string(EffortRejection r);
std::optional<EffortRejection> parse_effort_rejection(std::string_view s);

struct EffortMeasurement {
  std::optional<double> minutes;
  std::optional<EffortRejection> rejection;

  bool ok() const { return minutes.has_value(); }
};

// Elapsed time between first view and submission (epoch milliseconds). Valid when
// 4 s <= elapsed <= 12 min, inclusive at both ends.
EffortMeasurement validate_effort(std::optional<std::int64_t> first_view_ms,
                                  std::int64_t submitted_ms);

}  // namespace lmsig
