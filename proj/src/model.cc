#include "lmsig/model.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lmsig {

void ModelParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("pi must lie in (0, 1)");
  for (const auto& [g, sp] : signal) {
    if (!(sp.gamma > 0.0))
      throw std::invalid_argument("signal gamma must be positive for group " + group_label(g));
    if (!(sp.noise_var > 0.0))
      throw std::invalid_argument("signal noise variance must be positive for group " +
                                  group_label(g));
  }
}

double ModelParams::t(GroupId g) const {
  auto it = t_by_group.find(g);
  return it == t_by_group.end() ? 0.0 : it->second;
}

const SignalProduction& ModelParams::signal_for(GroupId g) const {
  auto it = signal.find(g);
  if (it == signal.end())
    throw std::out_of_range("no signal production for group " + group_label(g));
  return it->second;
}

double effort_cost(double effort, double ability) {
  if (effort < 0.0) throw std::domain_error("effort must be nonnegative");
  return effort * effort / (2.0 * std::exp(ability));
}

double marginal_effort_cost(double effort, double ability) {
  if (effort < 0.0) throw std::domain_error("effort must be nonnegative");
  return effort * std::exp(-ability);
}

double signal_mean(double effort, const SignalProduction& sp) {
  if (!(effort > 0.0)) throw std::domain_error("effort must be positive for signal production");
  return sp.k + sp.gamma * std::log(effort);
}

double signal_mean(double effort, GroupId g, const ModelParams& params) {
  return signal_mean(effort, params.signal_for(g));
}

double draw_signal(double effort, GroupId g, const ModelParams& params, Rng& rng) {
  const auto& sp = params.signal_for(g);
  const double mean = signal_mean(effort, sp);
  if (sp.noise_var <= 0.0) return mean;
  return mean + std::sqrt(sp.noise_var) * rng.normal();
}

double employer_utility(double bid, double ability, GroupId g, double taste_shock,
                        const ModelParams& params) {
  return params.t(g) + params.beta * ability - params.alpha * bid + taste_shock;
}

double worker_expost_utility(double bid, double effort, double cost, double ability, bool won) {
  return (won ? bid - cost : 0.0) - effort_cost(effort, ability);
}

}  // namespace lmsig
