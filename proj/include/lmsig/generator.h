#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmsig/beliefs.h"
#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/simulator.h"

namespace lmsig {

struct GeneratorConfig {
  std::vector<GroupId> groups;
  double alpha = 0.0110;
  double beta = 0.1644;
  double pi = 0.5749;
  double t = 2.0;  // common T(x); high enough that open jobs almost always hire
  Marginal cost = Marginal::normal(20.0, 60.0, -130.0, 170.0);
  Marginal ability = Marginal::normal(0.0, 2.5, -6.0, 6.0);
  double cost_ability_rho = 0.193;
  double consideration_rate = 0.37;
  double mean_applications = 30.0;
  int n_compositions = 400;
  double efficiency_sd = 0.0;
  double round_share = 0.7;  // share of bids rounded to whole multiples of round_step
  double round_step = 5.0;
  int iterations = 8;
  double damping = 0.5;  // weight on the new strategy
  int pool_jobs = 2000;
  int belief_jobs = 20000;
  int workers_per_group = 250;
};

// Signal production and parameters from the config plus the published signal table.
ModelParams generator_params(const GeneratorConfig& cfg);
ArrivalDistribution generator_arrival(const GeneratorConfig& cfg, std::uint64_t seed);
TypeDistribution generator_types(const GeneratorConfig& cfg);

struct Equilibrium {
  ModelParams params;
  ArrivalDistribution arrival;
  TypeDistribution types;
  ConsiderationRates consideration;
  StrategyProfile strategy;
  BeliefFunction beliefs;
  MarketOptions market;
  std::vector<double> strategy_change;  // sup-norm bid change per iteration
  std::vector<std::string> diagnostics;
};

// Alternates best responses to the win surface implied by the current beliefs
// and strategy with refitting beliefs on data simulated from the new strategy.
// One consistent profile; uniqueness is not established.
Equilibrium solve_generator_equilibrium(const GeneratorConfig& cfg, std::uint64_t seed);

// Employer view that plugs in the belief evaluated at the signal.
AbilityView belief_view(const BeliefFunction& beliefs);

// Win surface faced by workers when employers score with T + beta mu(s) - alpha b.
SimulationPool structural_pool(const std::vector<SimJob>& jobs, const ModelParams& params,
                               const BeliefFunction& beliefs, Rng& rng);

std::vector<SimJob> simulate_from(const Equilibrium& eq, int n_jobs, std::uint64_t seed,
                                  const std::string& job_prefix = "job");

}  // namespace lmsig
