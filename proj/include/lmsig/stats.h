#pragma once

#include <span>
#include <vector>

namespace lmsig {

double normal_cdf(double x);
double normal_quantile(double p);

double student_t_cdf(double x, double dof);
double student_t_quantile(double p, double dof);
double student_t_log_pdf(double x, double dof);

double mean(std::span<const double> x);
// Sample variance with n - 1 denominator; 0 for fewer than two values.
double variance(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b in O(n log n) (Knight's algorithm); handles ties in either margin.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Mid-rank pseudo-observations (rank - 0.5) / n with ties given their average rank.
std::vector<double> pseudo_observations(std::span<const double> x);

}  // namespace lmsig
