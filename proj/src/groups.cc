#include "lmsig/groups.h"

#include <stdexcept>

namespace lmsig {
namespace {

constexpr std::array<CountryGroup, 5> kCountries = {
    CountryGroup::kEnglishSpeaking, CountryGroup::kSouthAsia, CountryGroup::kEurope,
    CountryGroup::kOther, CountryGroup::kNotSouthAsiaSpike};
constexpr std::array<ArrivalGroup, 4> kArrivals = {
    ArrivalGroup::kArr0to5, ArrivalGroup::kArr5to45, ArrivalGroup::kSpikeArrival,
    ArrivalGroup::kArrOver45};
constexpr std::array<ReputationGroup, 4> kReputations = {
    ReputationGroup::kRookie, ReputationGroup::kLow, ReputationGroup::kMiddle,
    ReputationGroup::kHigh};

std::vector<ObservableGroup> enumerate_groups() {
  std::vector<ObservableGroup> out;
  for (auto c : kCountries)
    for (auto a : kArrivals)
      for (auto r : kReputations) {
        ObservableGroup g{c, a, r};
        if (is_valid(g)) out.push_back(g);
      }
  return out;
}

}  // namespace

bool is_valid(const ObservableGroup& g) {
  const bool spike = g.arrival == ArrivalGroup::kSpikeArrival;
  switch (g.country) {
    case CountryGroup::kNotSouthAsiaSpike:
      return spike;
    case CountryGroup::kSouthAsia:
      return true;
    default:
      return !spike;
  }
}

const std::vector<ObservableGroup>& all_groups() {
  static const std::vector<ObservableGroup> groups = enumerate_groups();
  return groups;
}

GroupId group_id(const ObservableGroup& g) {
  const auto& groups = all_groups();
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i] == g) return GroupId(static_cast<int>(i));
  throw std::invalid_argument("invalid observable group: " + std::string(to_string(g.country)) +
                              "/" + std::string(to_string(g.arrival)) + "/" +
                              std::string(to_string(g.reputation)));
}

ObservableGroup group_from_id(GroupId id) {
  const auto& groups = all_groups();
  if (id.index() < 0 || id.index() >= static_cast<int>(groups.size()))
    throw std::out_of_range("group id out of range: " + std::to_string(id.index()));
  return groups[static_cast<std::size_t>(id.index())];
}

std::string_view to_string(CountryGroup c) {
  switch (c) {
    case CountryGroup::kEnglishSpeaking: return "EnglishSpeaking";
    case CountryGroup::kSouthAsia: return "SouthAsia";
    case CountryGroup::kEurope: return "Europe";
    case CountryGroup::kOther: return "Other";
    case CountryGroup::kNotSouthAsiaSpike: return "NotSouthAsiaSpike";
  }
  return "?";
}

std::string_view to_string(ArrivalGroup a) {
  switch (a) {
    case ArrivalGroup::kArr0to5: return "Arr0to5";
    case ArrivalGroup::kArr5to45: return "Arr5to45";
    case ArrivalGroup::kSpikeArrival: return "SpikeArrival";
    case ArrivalGroup::kArrOver45: return "ArrOver45";
  }
  return "?";
}

std::string_view to_string(ReputationGroup r) {
  switch (r) {
    case ReputationGroup::kRookie: return "Rookie";
    case ReputationGroup::kLow: return "Low";
    case ReputationGroup::kMiddle: return "Middle";
    case ReputationGroup::kHigh: return "High";
  }
  return "?";
}

std::string group_label(GroupId id) {
  const auto g = group_from_id(id);
  return std::string(to_string(g.country)) + "/" + std::string(to_string(g.arrival)) + "/" +
         std::string(to_string(g.reputation));
}

std::optional<CountryGroup> parse_country(std::string_view s) {
  for (auto c : kCountries)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<ArrivalGroup> parse_arrival(std::string_view s) {
  for (auto a : kArrivals)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::optional<ReputationGroup> parse_reputation(std::string_view s) {
  for (auto r : kReputations)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

GroupId parse_group_label(std::string_view label) {
  const auto p1 = label.find('/');
  const auto p2 = label.find('/', p1 == std::string_view::npos ? p1 : p1 + 1);
  if (p1 == std::string_view::npos || p2 == std::string_view::npos)
    throw std::invalid_argument("malformed group label: " + std::string(label));
  const auto c = parse_country(label.substr(0, p1));
  const auto a = parse_arrival(label.substr(p1 + 1, p2 - p1 - 1));
  const auto r = parse_reputation(label.substr(p2 + 1));
  if (!c || !a || !r) throw std::invalid_argument("unknown group label: " + std::string(label));
  return group_id({*c, *a, *r});
}

}  // namespace lmsig
