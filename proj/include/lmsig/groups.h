#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmsig {

enum class CountryGroup : std::uint8_t {
  kEnglishSpeaking,
  kSouthAsia,
  kEurope,
  kOther,
  kNotSouthAsiaSpike,
};

enum class ArrivalGroup : std::uint8_t {
  kArr0to5,
  kArr5to45,
  kSpikeArrival,
  kArrOver45,
};

enum class ReputationGroup : std::uint8_t {
  kRookie,
  kLow,
  kMiddle,
  kHigh,
};

// Stratification cell of a worker's observables. Spike arrivals exist only for
// South Asia and for the pooled non-South-Asia spike country class, which in
// turn only exists for spike arrivals; that leaves 56 valid cells.
struct ObservableGroup {
  CountryGroup country = CountryGroup::kEnglishSpeaking;
  ArrivalGroup arrival = ArrivalGroup::kArr0to5;
  ReputationGroup reputation = ReputationGroup::kRookie;

  friend auto operator<=>(const ObservableGroup&, const ObservableGroup&) = default;
};

inline constexpr int kNumGroups = 56;

// Dense index of a valid ObservableGroup in [0, 56).
class GroupId {
 public:
  constexpr GroupId() = default;
  constexpr explicit GroupId(int index) : index_(index) {}
  constexpr int index() const { return index_; }
  friend constexpr auto operator<=>(GroupId, GroupId) = default;

 private:
  int index_ = 0;
};

bool is_valid(const ObservableGroup& g);

// Throws std::invalid_argument for invalid combinations.
GroupId group_id(const ObservableGroup& g);
ObservableGroup group_from_id(GroupId id);
const std::vector<ObservableGroup>& all_groups();

std::string_view to_string(CountryGroup c);
std::string_view to_string(ArrivalGroup a);
std::string_view to_string(ReputationGroup r);
std::string group_label(GroupId id);

std::optional<CountryGroup> parse_country(std::string_view s);
std::optional<ArrivalGroup> parse_arrival(std::string_view s);
std::optional<ReputationGroup> parse_reputation(std::string_view s);

// Parses "Country/Arrival/Reputation" as produced by group_label.
GroupId parse_group_label(std::string_view label);

template <typename T>
using GroupMap = std::map<GroupId, T>;

}  // namespace lmsig
