#include "lmsig/generator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lmsig/reference_values.h"
#include "lmsig/win_probability.h"

namespace lmsig {

ModelParams generator_params(const GeneratorConfig& cfg) {
  ModelParams p;
  p.alpha = cfg.alpha;
  p.beta = cfg.beta;
  p.pi = cfg.pi;
  for (GroupId g : cfg.groups) {
    p.t_by_group[g] = cfg.t;
    p.signal[g] = reference::signal_production(group_from_id(g));
  }
  p.validate();
  return p;
}

ArrivalDistribution generator_arrival(const GeneratorConfig& cfg, std::uint64_t seed) {
  if (cfg.groups.empty()) throw std::invalid_argument("generator needs at least one group");
  Rng rng = Rng::stream(seed, "arrival");
  ArrivalDistribution a;
  for (int k = 0; k < cfg.n_compositions; ++k) {
    GroupMap<int> comp;
    const int n = std::max(2, rng.poisson(cfg.mean_applications));
    for (int i = 0; i < n; ++i) ++comp[cfg.groups[rng.index(cfg.groups.size())]];
    a.compositions.push_back(std::move(comp));
    a.weights.push_back(1.0 / cfg.n_compositions);
  }
  return a;
}

TypeDistribution generator_types(const GeneratorConfig& cfg) {
  TypeDistribution t;
  for (GroupId g : cfg.groups) t.groups[g] = {cfg.cost, cfg.ability, cfg.cost_ability_rho};
  return t;
}

AbilityView belief_view(const BeliefFunction& beliefs) {
  return [&beliefs](const SimApplication& a) { return evaluate_belief(beliefs, a.signal, a.group); };
}

SimulationPool structural_pool(const std::vector<SimJob>& jobs, const ModelParams& params,
                               const BeliefFunction& beliefs, Rng& rng) {
  std::vector<std::vector<CompetitorDraw>> draws;
  draws.reserve(jobs.size());
  for (const auto& job : jobs) {
    std::vector<CompetitorDraw> d;
    for (const auto& a : job.applications) d.push_back({a.group, a.considered, a.bid, a.signal});
    draws.push_back(std::move(d));
  }
  SignalIndex index;
  GroupMap<double> t = params.t_by_group;
  const double beta = params.beta;
  index.general = [&beliefs, t, beta](double s, GroupId g) {
    const auto& gb = beliefs.groups.at(g);
    return std::pair<double, double>{t.at(g) + beta * gb(s), beta * gb.curve.derivative(s)};
  };
  return make_pool(draws, -params.alpha, params.pi, index, params.signal, rng);
}

namespace {

StrategyProfile initial_strategy(const TypeDistribution& types, const std::vector<GroupId>& groups,
                                 int nodes) {
  StrategyProfile s;
  for (GroupId g : groups) {
    const auto& d = types.group(g);
    GroupStrategy gs;
    for (int k = 0; k < nodes; ++k) {
      gs.cost_nodes.push_back(d.cost.quantile((k + 0.5) / nodes));
      gs.ability_nodes.push_back(d.ability.quantile((k + 0.5) / nodes));
    }
    for (double c : gs.cost_nodes)
      for (double a : gs.ability_nodes) {
        gs.bid.push_back(std::clamp(c + 90.0, kMinBid, kMaxBid));
        gs.effort.push_back(std::clamp(std::exp(0.5 * a), kEffortFloor, kMaxEffort));
      }
    s.groups[g] = std::move(gs);
  }
  return s;
}

BeliefFunction beliefs_from(const std::vector<SimJob>& jobs) {
  BeliefData data;
  for (const auto& job : jobs)
    for (const auto& a : job.applications) data[a.group].emplace_back(a.signal, a.ability);
  return fit_beliefs(data, 50);
}

}  // namespace

std::vector<SimJob> simulate_from(const Equilibrium& eq, int n_jobs, std::uint64_t seed,
                                  const std::string& job_prefix) {
  MarketOptions opts = eq.market;
  opts.job_prefix = job_prefix;
  return simulate_market(n_jobs, eq.arrival, eq.types, eq.strategy, eq.params, eq.consideration,
                         belief_view(eq.beliefs), seed, opts);
}

Equilibrium solve_generator_equilibrium(const GeneratorConfig& cfg, std::uint64_t seed) {
  constexpr int kNodes = 25;
  Equilibrium eq;
  eq.params = generator_params(cfg);
  eq.arrival = generator_arrival(cfg, seed);
  eq.types = generator_types(cfg);
  eq.consideration.default_rate = cfg.consideration_rate;
  eq.market.efficiency_sd = cfg.efficiency_sd;
  eq.market.workers_per_group = cfg.workers_per_group;
  eq.market.round_share = cfg.round_share;
  eq.market.round_step = cfg.round_step;
  eq.strategy = initial_strategy(eq.types, cfg.groups, kNodes);
  // Actions do not depend on beliefs, so the first belief fit can use any employer view.
  eq.beliefs = beliefs_from(simulate_market(cfg.belief_jobs, eq.arrival, eq.types, eq.strategy,
                                            eq.params, eq.consideration, group_mean_view({}),
                                            splitmix64(seed ^ 0xb1), eq.market));

  for (int it = 0; it < cfg.iterations; ++it) {
    const auto jobs = simulate_from(eq, cfg.pool_jobs, splitmix64(seed + 2 * it + 1), "p");
    Rng rng = Rng::stream(seed, "generator-pool", static_cast<std::uint64_t>(it));
    const SimulationPool pool = structural_pool(jobs, eq.params, eq.beliefs, rng);
    const ExactSurface exact(pool);
    const CachedSurface surface(exact, cfg.groups);
    const StrategyProfile br = calibrate_strategy_from_focs(eq.types, surface, cfg.groups, kNodes);
    double change = 0;
    for (auto& [g, gs] : eq.strategy.groups) {
      const auto& nb = br.groups.at(g);
      for (std::size_t k = 0; k < gs.bid.size(); ++k) {
        change = std::max(change, std::abs(nb.bid[k] - gs.bid[k]));
        gs.bid[k] += cfg.damping * (nb.bid[k] - gs.bid[k]);
        // Damp effort on the log scale.
        gs.effort[k] = std::exp(std::log(gs.effort[k]) +
                                cfg.damping * (std::log(nb.effort[k]) - std::log(gs.effort[k])));
      }
    }
    eq.strategy_change.push_back(change);
    eq.beliefs =
        beliefs_from(simulate_from(eq, cfg.belief_jobs, splitmix64(seed + 2 * it + 2), "b"));
  }
  return eq;
}

}  // namespace lmsig
