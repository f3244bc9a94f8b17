#pragma once

#include <vector>

#include "lmsig/groups.h"
#include "lmsig/model.h"

namespace lmsig::reference {

// Published structural demand estimates for the pre-LLM market.
inline constexpr double kPriceCoefficient = 0.0110;  // |alpha|
inline constexpr double kAbilityCoefficient = 0.1644;
inline constexpr double kAbandonRate = 0.4251;  // 1 - pi
inline constexpr double kNotAbandonProbability = 1.0 - kAbandonRate;

// Published correlation between estimated cost and ability.
inline constexpr double kCostAbilityCorrelation = 0.193;

struct SignalProductionRow {
  ObservableGroup group;
  SignalProduction production;
};

// Published per-group signal production estimates (K, gamma, noise variance).
const std::vector<SignalProductionRow>& signal_production_table();
SignalProduction signal_production(const ObservableGroup& g);

}  // namespace lmsig::reference
