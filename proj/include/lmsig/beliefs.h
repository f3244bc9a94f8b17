#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmsig/groups.h"

namespace lmsig {

// Weighted pool-adjacent-violators: the nondecreasing sequence minimizing
// sum w_i (y_i - f_i)^2. Weights must be positive.
std::vector<double> pava(std::span<const double> y, std::span<const double> w);

// Piecewise cubic Hermite interpolant with monotonicity-preserving slopes
// (weighted harmonic mean at interior knots, one-sided three-point ends).
// Constant beyond the end knots.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  // x strictly increasing, same length as y, at least one knot.
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double s) const;
  double derivative(double s) const;

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& slopes() const { return m_; }

 private:
  std::vector<double> x_, y_, m_;
};

struct GroupBelief {
  std::vector<double> knot_signal;   // bin mean signals
  std::vector<double> knot_ability;  // isotonic fit at those knots
  std::vector<double> knot_weight;   // observations per knot
  MonotoneCubic curve;
  int n_bins = 0;
  bool reduced_bins = false;

  double operator()(double s) const { return curve(s); }
};

struct BeliefFunction {
  GroupMap<GroupBelief> groups;
  std::vector<std::string> diagnostics;
};

// Pairs of (signal, ability) per group.
using BeliefData = GroupMap<std::vector<std::pair<double, double>>>;

// Equal-mass binning on the signal, weighted isotonic regression of bin-mean
// ability on bin-mean signal, monotone cubic through the fitted knots, flat tails.
// Groups with fewer than n_bins points use max(5, N / 10) bins (capped at N).
BeliefFunction fit_beliefs(const BeliefData& data, int n_bins = 50);
GroupBelief fit_group_belief(std::vector<std::pair<double, double>> points, int n_bins,
                             std::vector<std::string>* diagnostics = nullptr,
                             const std::string& label = {});

// Throws std::out_of_range for a group without a fitted belief.
double evaluate_belief(const BeliefFunction& f, double s, GroupId g);

}  // namespace lmsig
