#pragma once

#include "lmsig/groups.h"
#include "lmsig/random.h"

namespace lmsig {

// Sample construction bounds on bids (dollars) and valid effort window (minutes).
inline constexpr double kMinBid = 30.0;
inline constexpr double kMaxBid = 250.0;
inline constexpr double kEffortFloor = 1.0 / 15.0;  // 4 seconds
inline constexpr double kMaxEffort = 12.0;

// Linear-log signal production: s = K + gamma * log(e) + noise, noise ~ N(0, noise_var).
struct SignalProduction {
  double k = 0.0;
  double gamma = 1.0;
  double noise_var = 1.0;
};

struct ModelParams {
  double alpha = 0.0;  // disutility per dollar of bid, > 0
  double beta = 0.0;   // utility per unit of ability
  GroupMap<double> t_by_group;
  double pi = 0.5;  // probability the employer does not abandon
  GroupMap<SignalProduction> signal;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  double t(GroupId g) const;
  const SignalProduction& signal_for(GroupId g) const;
};

// Estimation writes the bid term as +alpha_signed * b; the model's alpha is its negation.
inline double alpha_signed_from_disutility(double alpha) { return -alpha; }
inline double disutility_from_alpha_signed(double alpha_signed) { return -alpha_signed; }

// C(e; a) = e^2 / (2 exp(a)).
double effort_cost(double effort, double ability);
// dC/de = e exp(-a).
double marginal_effort_cost(double effort, double ability);

double signal_mean(double effort, const SignalProduction& sp);
double signal_mean(double effort, GroupId g, const ModelParams& params);
double draw_signal(double effort, GroupId g, const ModelParams& params, Rng& rng);

// T(x) + beta * a - alpha * b + shock. The outside option is worth its own shock.
double employer_utility(double bid, double ability, GroupId g, double taste_shock,
                        const ModelParams& params);

// w * (b - c) - C(e; a); effort costs are sunk whether or not the worker wins.
double worker_expost_utility(double bid, double effort, double cost, double ability, bool won);

// Ability expressed in dollars of employer willingness to pay.
inline double ability_in_dollars(double ability, double beta, double alpha) {
  return beta / alpha * ability;
}

}  // namespace lmsig
