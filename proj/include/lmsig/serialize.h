#pragma once

#include <string>

#include <json.hpp>

#include "lmsig/beliefs.h"
#include "lmsig/bid_signal.h"
#include "lmsig/counterfactual.h"
#include "lmsig/demand.h"
#include "lmsig/model.h"
#include "lmsig/simulator.h"
#include "lmsig/win_probability.h"

namespace lmsig {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Group-keyed maps are objects keyed by group_label.
template <typename T, typename F>
Json group_map_json(const GroupMap<T>& m, F&& f) {
  Json j = Json::object();
  for (const auto& [g, v] : m) j[group_label(g)] = f(v);
  return j;
}

template <typename T, typename F>
GroupMap<T> group_map_from(const Json& j, F&& f) {
  GroupMap<T> m;
  for (const auto& [k, v] : j.items()) m[parse_group_label(k)] = f(v);
  return m;
}

// Flat key-value parameter files: "alpha_signed", "pi", "K_lambda/<group>", ...
Json to_json(const ReducedFormParams& p);
ReducedFormParams reduced_form_from_json(const Json& j);
Json to_json(const StructuralParams& p);
StructuralParams structural_from_json(const Json& j);
Json to_json(const FitReport& r);

Json to_json(const GroupMap<SignalProduction>& m);
GroupMap<SignalProduction> signal_production_from_json(const Json& j);

Json to_json(const BidBinModel& m);
BidBinModel bid_bins_from_json(const Json& j);
Json to_json(const CopulaModel& m);
CopulaModel copula_from_json(const Json& j);

// Linear-index pools only.
Json to_json(const SimulationPool& pool);
SimulationPool pool_from_json(const Json& j);

Json to_json(const BeliefFunction& f);
BeliefFunction beliefs_from_json(const Json& j);

Json to_json(const ArrivalDistribution& a);
ArrivalDistribution arrival_from_json(const Json& j);
Json to_json(const Marginal& m);
Marginal marginal_from_json(const Json& j);
Json to_json(const TypeDistribution& t);
TypeDistribution types_from_json(const Json& j);
Json to_json(const StrategyProfile& s);
StrategyProfile strategy_from_json(const Json& j);

Json to_json(const ConvergenceReport& r);
Json to_json(const WelfareReport& r);
Json to_json(const Matrix5& m);

// Throws std::runtime_error naming the file or the schema version mismatch.
Json read_json_file(const std::string& path);
// Writes j with a trailing newline; doubles are printed with round-trip precision.
void write_json_file(const std::string& path, const Json& j);
// Throws SchemaError unless j["schema_version"] == kSchemaVersion.
void check_schema(const Json& j, const std::string& what);

}  // namespace lmsig
