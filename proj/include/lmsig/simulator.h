#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/random.h"
#include "lmsig/win_probability.h"

namespace lmsig {

// Empirical distribution over job-post compositions (applicant counts per group).
struct ArrivalDistribution {
  std::vector<GroupMap<int>> compositions;
  std::vector<double> weights;

  void validate() const;
  const GroupMap<int>& sample(Rng& rng) const;
};

struct Marginal {
  enum class Kind { kNormal, kEmpirical };
  Kind kind = Kind::kNormal;
  double mean = 0.0, sd = 1.0;
  double lo = -1e300, hi = 1e300;  // support; the normal is truncated to it
  std::vector<double> values;      // sorted sample, empirical kind

  static Marginal normal(double mean, double sd, double lo, double hi);
  static Marginal empirical(std::vector<double> values);
  double quantile(double u) const;
};

// Gaussian copula over (cost, ability) marginals.
struct GroupTypeDistribution {
  Marginal cost, ability;
  double rho = 0.0;
};

struct TypeDistribution {
  GroupMap<GroupTypeDistribution> groups;

  // (cost, ability)
  std::pair<double, double> sample(GroupId g, Rng& rng) const;
  const GroupTypeDistribution& group(GroupId g) const;
};

// Bid and effort over a rectangular grid of marginal quantile nodes, bilinear in
// between and clamped outside.
struct GroupStrategy {
  std::vector<double> cost_nodes, ability_nodes;
  std::vector<double> bid, effort;  // row-major, cost index first

  std::pair<double, double> act(double cost, double ability) const;
};

// Maps a worker's type to (bid, effort).
class ActionRule {
 public:
  virtual ~ActionRule() = default;
  virtual std::pair<double, double> act(GroupId g, double cost, double ability) const = 0;
};

struct StrategyProfile final : ActionRule {
  GroupMap<GroupStrategy> groups;

  std::pair<double, double> act(GroupId g, double cost, double ability) const override;
};

struct ConsiderationRates {
  GroupMap<double> rate;
  double default_rate = 1.0;

  double operator()(GroupId g) const;
};

struct SimApplication {
  std::string worker_id;
  GroupId group;
  double cost = 0.0, ability = 0.0;
  double efficiency = 0.0;  // log time-efficiency multiplier of the worker
  double bid = 0.0;
  double effort = 0.0;    // true effort, minutes
  double measured = 0.0;  // observed minutes, effort / exp(efficiency)
  double signal = 0.0;
  double noise = 0.0;
  double perceived_ability = 0.0;  // what the employer plugs in for ability
  bool considered = false;
  bool won = false;
};

struct SimJob {
  std::string job_id;
  std::vector<SimApplication> applications;
  bool abandoned = false;
  int winner = -1;
  double outside_probability = 1.0;
  double probability_sum_error = 0.0;  // |sum of choice probabilities - 1|
};

// What the employer uses for ability when scoring an application.
using AbilityView = std::function<double(const SimApplication&)>;
AbilityView true_ability_view();
AbilityView group_mean_view(GroupMap<double> means);

struct MarketOptions {
  double efficiency_sd = 0.0;  // sd of the worker log time-efficiency
  int workers_per_group = 250;
  std::string job_prefix = "job";
  double round_share = 0.0;  // share of bids rounded to a multiple of round_step
  double round_step = 5.0;
};

// Categorical draw over {outside, considered...} with the abandonment mixture.
// Returns -1 for the outside option.
int choose_winner(const std::vector<double>& considered_deltas, double pi, Rng& rng);

// Each job uses its own stream split from the seed, so results do not depend on
// how jobs are scheduled.
std::vector<SimJob> simulate_market(int n_jobs, const ArrivalDistribution& arrival,
                                    const TypeDistribution& types, const ActionRule& strategy,
                                    const ModelParams& params, const ConsiderationRates& consideration,
                                    const AbilityView& employer_view, std::uint64_t seed,
                                    const MarketOptions& opts = {});

struct BestResponse {
  double bid = kMaxBid;
  double effort = kEffortFloor;
  double payoff = 0.0;
};

// max over b in [30, 250], e in [1/15, 12] of P(b, e) (b - c) - C(e; a). Coarse
// bid scan, golden-section effort search, then bisection on the bid FOC inside
// the best bracket. Ties go to the highest bid and lowest effort.
BestResponse best_response(const WinSurface& surface, GroupId g, double cost, double ability);

StrategyProfile calibrate_strategy_from_focs(const TypeDistribution& types,
                                             const WinSurface& surface,
                                             const std::vector<GroupId>& groups, int nodes = 25);

}  // namespace lmsig
