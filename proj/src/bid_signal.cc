#include "lmsig/bid_signal.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "lmsig/model.h"
#include "lmsig/stats.h"

namespace lmsig {

int GroupBidBins::assign(double bid) const {
  auto it = std::lower_bound(bins.begin(), bins.end(), bid,
                             [](const BidBin& b, double v) { return b.center < v; });
  if (it == bins.begin()) return 0;
  if (it == bins.end()) return static_cast<int>(bins.size()) - 1;
  const auto prev = it - 1;
  // it->center >= bid > prev->center
  const int k = static_cast<int>(it - bins.begin());
  return (it->center - bid < bid - prev->center) ? k : k - 1;
}

GroupBidBins fit_group_bid_bins(std::span<const double> bids) {
  if (bids.empty()) throw std::invalid_argument("no bids to bin");
  GroupBidBins out;
  out.n_obs = static_cast<int>(bids.size());
  out.sparse = out.n_obs < kMinGroupObservations;
  std::map<double, int> counts;
  for (double b : bids) ++counts[b];
  const double threshold = std::max(20.0, 0.005 * out.n_obs);
  std::vector<double> centers{kMinBid, kMaxBid};
  for (const auto& [v, c] : counts)
    if (c >= threshold && v > kMinBid && v < kMaxBid) centers.push_back(v);
  std::sort(centers.begin(), centers.end());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    BidBin b;
    b.center = centers[i];
    b.lo = i == 0 ? kMinBid : 0.5 * (centers[i - 1] + centers[i]);
    b.hi = i + 1 == centers.size() ? kMaxBid : 0.5 * (centers[i] + centers[i + 1]);
    out.bins.push_back(b);
  }
  std::vector<int> assigned(out.bins.size()), off(out.bins.size());
  for (double v : bids) {
    const int k = out.assign(v);
    ++assigned[k];
    if (v != out.bins[k].center) ++off[k];
  }
  for (std::size_t k = 0; k < out.bins.size(); ++k) {
    out.bins[k].mass = double(assigned[k]) / out.n_obs;
    out.bins[k].deviation_freq = assigned[k] ? double(off[k]) / assigned[k] : 0.0;
  }
  return out;
}

BidBinModel fit_bid_bins(const GroupMap<std::vector<double>>& bids) {
  BidBinModel m;
  for (const auto& [g, v] : bids) {
    if (v.empty()) throw std::invalid_argument("no bids for group " + group_label(g));
    m.groups[g] = fit_group_bid_bins(v);
    if (m.groups[g].sparse)
      m.diagnostics.push_back(group_label(g) + ": sparse, " + std::to_string(v.size()) + " bids");
  }
  return m;
}

namespace {

struct Quantiles {
  std::vector<double> a, b;
};

// t quantiles of the pseudo-observations, computed once per distinct value.
Quantiles t_scores(std::span<const double> u, std::span<const double> v, double dof) {
  std::map<double, double> cache;
  auto q = [&](double p) {
    auto [it, fresh] = cache.try_emplace(p, 0.0);
    if (fresh) it->second = student_t_quantile(p, dof);
    return it->second;
  };
  Quantiles out;
  out.a.reserve(u.size());
  out.b.reserve(v.size());
  for (double p : u) out.a.push_back(q(p));
  for (double p : v) out.b.push_back(q(p));
  return out;
}

double loglik_from_scores(const Quantiles& t, double rho, double dof) {
  const double n = static_cast<double>(t.a.size());
  const double one_m = 1.0 - rho * rho;
  double ll = n * (boost::math::lgamma(0.5 * (dof + 2)) + boost::math::lgamma(0.5 * dof) -
                   2 * boost::math::lgamma(0.5 * (dof + 1)) - 0.5 * std::log(one_m));
  for (std::size_t i = 0; i < t.a.size(); ++i) {
    const double x = t.a[i], y = t.b[i];
    ll += -0.5 * (dof + 2) * std::log1p((x * x - 2 * rho * x * y + y * y) / (dof * one_m)) +
          0.5 * (dof + 1) * (std::log1p(x * x / dof) + std::log1p(y * y / dof));
  }
  return ll;
}

template <typename F>
double golden_max(F f, double lo, double hi, double tol, double* best_value = nullptr) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  const double x = f1 > f2 ? x1 : x2;
  if (best_value) *best_value = std::max(f1, f2);
  return x;
}

struct ProfilePoint {
  double rho, ll;
};

ProfilePoint profile_rho(const Quantiles& t, double dof) {
  double ll = 0;
  const double rho = golden_max([&](double r) { return loglik_from_scores(t, r, dof); }, -0.995,
                                0.995, 1e-6, &ll);
  return {rho, ll};
}

bool degenerate(std::span<const double> x) {
  return x.empty() || std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

TCopulaFit fit_pseudo(std::span<const double> u, std::span<const double> v) {
  TCopulaFit fit;
  if (degenerate(u) || degenerate(v)) {
    fit.independent = true;
    return fit;
  }
  constexpr double kLo = 2.1, kHi = 50.0;
  constexpr int kGrid = 20;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i)
    grid[i] = std::exp(std::log(kLo) + (std::log(kHi) - std::log(kLo)) * i / (kGrid - 1));
  std::size_t best = 0;
  std::vector<ProfilePoint> prof(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    prof[i] = profile_rho(t_scores(u, v, grid[i]), grid[i]);
    if (prof[i].ll > prof[best].ll) best = i;
  }
  const double lo = std::log(grid[best == 0 ? 0 : best - 1]);
  const double hi = std::log(grid[best + 1 == grid.size() ? best : best + 1]);
  double ll = 0;
  const double log_dof = golden_max(
      [&](double ld) { return profile_rho(t_scores(u, v, std::exp(ld)), std::exp(ld)).ll; }, lo,
      hi, 1e-3, &ll);
  if (ll >= prof[best].ll) {
    fit.dof = std::exp(log_dof);
  } else {
    fit.dof = grid[best];
  }
  const ProfilePoint p = profile_rho(t_scores(u, v, fit.dof), fit.dof);
  fit.rho = p.rho;
  fit.loglik = p.ll;
  return fit;
}

}  // namespace

double t_copula_loglik(std::span<const double> u, std::span<const double> v, double rho,
                       double dof) {
  return loglik_from_scores(t_scores(u, v, dof), rho, dof);
}

TCopulaFit fit_t_copula(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_t_copula: size mismatch");
  if (degenerate(x) || degenerate(y)) return fit_pseudo(x, y);
  const auto u = pseudo_observations(x);
  const auto v = pseudo_observations(y);
  return fit_pseudo(u, v);
}

std::pair<double, double> sample_t_copula(double rho, double dof, Rng& rng) {
  const double z1 = rng.normal(), z2 = rng.normal();
  const double x1 = z1, x2 = rho * z1 + std::sqrt(1 - rho * rho) * z2;
  const double w = std::sqrt(rng.chi_squared(dof) / dof);
  return {student_t_cdf(x1 / w, dof), student_t_cdf(x2 / w, dof)};
}

CopulaModel fit_copula(const GroupMap<std::vector<std::pair<int, double>>>& data,
                       const BidBinModel& bins) {
  CopulaModel model;
  for (const auto& [g, pairs] : data) {
    if (pairs.empty()) continue;
    auto bin_it = bins.groups.find(g);
    if (bin_it == bins.groups.end())
      throw std::invalid_argument("no bid bins for group " + group_label(g));
    GroupCopula gc;
    double acc = 0;
    for (const auto& b : bin_it->second.bins) gc.bin_cdf.push_back(acc += b.mass);
    gc.bin_cdf.back() = 1.0;
    for (const auto& p : pairs) gc.sorted_signals.push_back(p.second);
    std::sort(gc.sorted_signals.begin(), gc.sorted_signals.end());

    // Rank-transform within each source group, then concatenate.
    std::vector<double> u, v;
    auto append = [&](const std::vector<std::pair<int, double>>& src) {
      std::vector<double> a, b;
      for (const auto& p : src) a.push_back(p.first), b.push_back(p.second);
      const auto pa = pseudo_observations(a), pb = pseudo_observations(b);
      u.insert(u.end(), pa.begin(), pa.end());
      v.insert(v.end(), pb.begin(), pb.end());
    };
    append(pairs);
    std::size_t total = pairs.size();
    if (total < kMinGroupObservations) {
      const ObservableGroup og = group_from_id(g);
      for (int dist = 1; dist <= 3 && total < kMinGroupObservations; ++dist) {
        for (int sign : {-1, 1}) {
          const int r = static_cast<int>(og.reputation) + sign * dist;
          if (r < 0 || r > 3 || total >= kMinGroupObservations) continue;
          ObservableGroup n = og;
          n.reputation = static_cast<ReputationGroup>(r);
          const GroupId nid = group_id(n);
          auto it = data.find(nid);
          if (it == data.end() || it->second.empty()) continue;
          append(it->second);
          total += it->second.size();
          gc.pooled_with.push_back(nid);
        }
      }
      std::string msg = group_label(g) + ": " + std::to_string(pairs.size()) + " pairs, pooled with";
      for (GroupId p : gc.pooled_with) msg += " " + group_label(p);
      if (gc.pooled_with.empty()) msg += " nothing";
      model.diagnostics.push_back(msg);
    }
    gc.fit = fit_pseudo(u, v);
    if (gc.fit.independent)
      model.diagnostics.push_back(group_label(g) + ": degenerate margin, independence copula");
    model.groups[g] = std::move(gc);
  }
  return model;
}

std::pair<double, double> sample_bid_signal(const BidBinModel& bins, const CopulaModel& copula,
                                            GroupId g, Rng& rng) {
  auto cit = copula.groups.find(g);
  auto bit = bins.groups.find(g);
  if (cit == copula.groups.end() || bit == bins.groups.end())
    throw std::out_of_range("no bid/signal model for group " + group_label(g));
  const GroupCopula& gc = cit->second;
  double u1, u2;
  if (gc.fit.independent) {
    u1 = rng.uniform_open();
    u2 = rng.uniform_open();
  } else {
    std::tie(u1, u2) = sample_t_copula(gc.fit.rho, gc.fit.dof, rng);
  }
  const auto k = static_cast<std::size_t>(
      std::lower_bound(gc.bin_cdf.begin(), gc.bin_cdf.end(), u1) - gc.bin_cdf.begin());
  const BidBin& bin = bit->second.bins[std::min(k, gc.bin_cdf.size() - 1)];
  const std::size_t n = gc.sorted_signals.size();
  const auto idx = static_cast<std::size_t>(std::ceil(u2 * double(n)));
  const double signal = gc.sorted_signals[std::clamp<std::size_t>(idx, 1, n) - 1];
  double bid = bin.center;
  if (rng.bernoulli(bin.deviation_freq)) bid = rng.uniform(bin.lo, bin.hi);
  return {bid, signal};
}

}  // namespace lmsig
