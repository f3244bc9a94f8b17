#include "lmsig/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace lmsig {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_cdf(double x, double dof) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(dof), x);
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("t quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

double student_t_log_pdf(double x, double dof) {
  return boost::math::lgamma(0.5 * (dof + 1.0)) - boost::math::lgamma(0.5 * dof) -
         0.5 * std::log(dof * M_PI) - 0.5 * (dof + 1.0) * std::log1p(x * x / dof);
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / double(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation: size mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Number of pairs sharing a value in runs of equal elements of a sorted range.
template <typename It, typename Eq>
double tied_pairs(It first, It last, Eq eq) {
  double total = 0;
  while (first != last) {
    It run = first;
    double len = 0;
    while (run != last && eq(*run, *first)) ++run, ++len;
    total += len * (len - 1) / 2;
    first = run;
  }
  return total;
}

// Merge sort on y that counts exchanges (discordant pairs).
double merge_count(std::vector<double>& y, std::vector<double>& buf, std::size_t lo,
                   std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  double swaps = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      swaps += double(mid - i);
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const double n0 = double(n) * double(n - 1) / 2;

  double n1 = 0, n3 = 0;  // ties in x, joint ties
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[idx[j]] == x[idx[i]]) ++j;
      n1 += double(j - i) * double(j - i - 1) / 2;
      std::size_t k = i;
      while (k < j) {
        std::size_t l = k;
        while (l < j && y[idx[l]] == y[idx[k]]) ++l;
        n3 += double(l - k) * double(l - k - 1) / 2;
        k = l;
      }
      i = j;
    }
  }
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const double swaps = merge_count(ys, buf, 0, n);
  const double n2 = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  const double concordant_minus_discordant = n0 - n1 - n2 + n3 - 2 * swaps;
  const double denom = std::sqrt((n0 - n1) * (n0 - n2));
  return denom > 0 ? concordant_minus_discordant / denom : 0.0;
}

std::vector<double> pseudo_observations(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> u(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) u[idx[k]] = (avg_rank - 0.5) / double(n);
    i = j;
  }
  return u;
}

}  // namespace lmsig
