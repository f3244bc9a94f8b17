#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmsig/groups.h"
#include "lmsig/random.h"

namespace lmsig {

struct BidBin {
  double center = 0.0;
  double mass = 0.0;            // share of the group's bids assigned here
  double deviation_freq = 0.0;  // share of assigned bids not exactly at the center
  double lo = 0.0, hi = 0.0;    // deviation interval
};

struct GroupBidBins {
  std::vector<BidBin> bins;  // sorted by center, first 30 and last 250
  int n_obs = 0;
  bool sparse = false;  // fewer than 40 observations

  // Nearest center, ties to the lower one.
  int assign(double bid) const;
};

struct BidBinModel {
  GroupMap<GroupBidBins> groups;
  std::vector<std::string> diagnostics;
};

inline constexpr int kMinGroupObservations = 40;

// Centers are 30, 250, and every bid value held by at least max(20, 0.5% of N) bids.
GroupBidBins fit_group_bid_bins(std::span<const double> bids);
// Throws std::invalid_argument naming an empty group.
BidBinModel fit_bid_bins(const GroupMap<std::vector<double>>& bids);

struct TCopulaFit {
  double rho = 0.0;
  double dof = 50.0;
  double loglik = 0.0;
  bool independent = false;  // fallback when a margin has no variation
};

// Profile maximum likelihood of the bivariate t copula on mid-rank pseudo-observations.
// dof is profiled over a log-spaced grid on [2.1, 50] then refined locally.
TCopulaFit fit_t_copula(std::span<const double> x, std::span<const double> y);
double t_copula_loglik(std::span<const double> u, std::span<const double> v, double rho,
                       double dof);
// One draw of copula uniforms.
std::pair<double, double> sample_t_copula(double rho, double dof, Rng& rng);

struct GroupCopula {
  TCopulaFit fit;
  std::vector<double> bin_cdf;         // cumulative bin masses, last entry 1
  std::vector<double> sorted_signals;  // empirical signal marginal
  std::vector<GroupId> pooled_with;    // other groups whose data entered the fit
};

struct CopulaModel {
  GroupMap<GroupCopula> groups;
  std::vector<std::string> diagnostics;
};

// Pairs of (bid bin index, signal) per group. Groups below 40 pairs borrow data
// from the nearest reputation classes with the same country and arrival.
CopulaModel fit_copula(const GroupMap<std::vector<std::pair<int, double>>>& data,
                       const BidBinModel& bins);

// Copula draw, inverse marginals, then a Bernoulli deviation drawn uniformly
// within the bin's interval.
std::pair<double, double> sample_bid_signal(const BidBinModel& bins, const CopulaModel& copula,
                                            GroupId g, Rng& rng);

}  // namespace lmsig
