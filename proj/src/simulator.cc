#include "lmsig/simulator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lmsig/demand.h"
#include "lmsig/stats.h"

namespace lmsig {

void ArrivalDistribution::validate() const {
  if (compositions.size() != weights.size())
    throw std::invalid_argument("arrival: one weight per composition");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw std::invalid_argument("arrival: negative weight");
    total += w;
  }
  if (compositions.empty() || std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("arrival: weights must sum to 1");
}

const GroupMap<int>& ArrivalDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return compositions[i];
  }
  return compositions.back();
}

Marginal Marginal::normal(double mean, double sd, double lo, double hi) {
  if (!(sd > 0) || !(hi > lo)) throw std::invalid_argument("normal marginal: bad parameters");
  Marginal m;
  m.kind = Kind::kNormal;
  m.mean = mean;
  m.sd = sd;
  m.lo = lo;
  m.hi = hi;
  return m;
}

Marginal Marginal::empirical(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical marginal: no values");
  Marginal m;
  m.kind = Kind::kEmpirical;
  std::sort(values.begin(), values.end());
  m.lo = values.front();
  m.hi = values.back();
  m.values = std::move(values);
  return m;
}

double Marginal::quantile(double u) const {
  u = std::clamp(u, 1e-12, 1.0 - 1e-12);
  if (kind == Kind::kEmpirical) {
    const auto n = values.size();
    const auto k = static_cast<std::size_t>(std::ceil(u * double(n)));
    return values[std::clamp<std::size_t>(k, 1, n) - 1];
  }
  const double flo = normal_cdf((lo - mean) / sd);
  const double fhi = normal_cdf((hi - mean) / sd);
  const double p = std::clamp(flo + u * (fhi - flo), 1e-300, 1.0 - 1e-16);
  return std::clamp(mean + sd * normal_quantile(p), lo, hi);
}

const GroupTypeDistribution& TypeDistribution::group(GroupId g) const {
  auto it = groups.find(g);
  if (it == groups.end()) throw std::out_of_range("no type distribution for " + group_label(g));
  return it->second;
}

std::pair<double, double> TypeDistribution::sample(GroupId g, Rng& rng) const {
  const auto& d = group(g);
  const double z1 = rng.normal(), z2 = rng.normal();
  const double x2 = d.rho * z1 + std::sqrt(1 - d.rho * d.rho) * z2;
  return {d.cost.quantile(normal_cdf(z1)), d.ability.quantile(normal_cdf(x2))};
}

namespace {

// Index i with nodes[i] <= x <= nodes[i + 1] and the weight on i + 1.
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double x) {
  if (nodes.size() == 1 || x <= nodes.front()) return {0, 0.0};
  if (x >= nodes.back()) return {nodes.size() - 2, 1.0};
  const std::size_t i = std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin() - 1;
  return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

}  // namespace

std::pair<double, double> GroupStrategy::act(double cost, double ability) const {
  const std::size_t na = ability_nodes.size();
  if (cost_nodes.empty() || na == 0) throw std::logic_error("empty strategy grid");
  auto [i, wc] = locate(cost_nodes, cost);
  auto [j, wa] = locate(ability_nodes, ability);
  const std::size_t i1 = std::min(i + 1, cost_nodes.size() - 1), j1 = std::min(j + 1, na - 1);
  auto lerp2 = [&](const std::vector<double>& v) {
    return (1 - wc) * ((1 - wa) * v[i * na + j] + wa * v[i * na + j1]) +
           wc * ((1 - wa) * v[i1 * na + j] + wa * v[i1 * na + j1]);
  };
  return {std::clamp(lerp2(bid), kMinBid, kMaxBid), std::max(lerp2(effort), kEffortFloor)};
}

std::pair<double, double> StrategyProfile::act(GroupId g, double cost, double ability) const {
  auto it = groups.find(g);
  if (it == groups.end()) throw std::out_of_range("no strategy for group " + group_label(g));
  return it->second.act(cost, ability);
}

double ConsiderationRates::operator()(GroupId g) const {
  auto it = rate.find(g);
  return it == rate.end() ? default_rate : it->second;
}

AbilityView true_ability_view() {
  return [](const SimApplication& a) { return a.ability; };
}

AbilityView group_mean_view(GroupMap<double> means) {
  return [m = std::move(means)](const SimApplication& a) {
    auto it = m.find(a.group);
    return it == m.end() ? 0.0 : it->second;
  };
}

int choose_winner(const std::vector<double>& considered_deltas, double pi, Rng& rng) {
  const auto p = choice_probabilities(considered_deltas, pi);
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k) - 1;
  }
  return -1;
}

std::vector<SimJob> simulate_market(int n_jobs, const ArrivalDistribution& arrival,
                                    const TypeDistribution& types, const ActionRule& strategy,
                                    const ModelParams& params, const ConsiderationRates& consideration,
                                    const AbilityView& employer_view, std::uint64_t seed,
                                    const MarketOptions& opts) {
  arrival.validate();
  std::vector<SimJob> jobs(n_jobs);
  std::vector<double> deltas;
  std::vector<int> slot_of;
  for (int m = 0; m < n_jobs; ++m) {
    Rng rng = Rng::stream(seed, "market", static_cast<std::uint64_t>(m));
    SimJob& job = jobs[m];
    job.job_id = opts.job_prefix + std::to_string(m);
    for (const auto& [g, count] : arrival.sample(rng)) {
      const SignalProduction& sp = params.signal_for(g);
      for (int k = 0; k < count; ++k) {
        SimApplication a;
        a.group = g;
        const auto w = rng.index(static_cast<std::size_t>(std::max(1, opts.workers_per_group)));
        a.worker_id = "w" + std::to_string(g.index()) + "_" + std::to_string(w);
        std::tie(a.cost, a.ability) = types.sample(g, rng);
        std::tie(a.bid, a.effort) = strategy.act(g, a.cost, a.ability);
        if (opts.round_share > 0 && rng.bernoulli(opts.round_share))
          a.bid = std::clamp(std::round(a.bid / opts.round_step) * opts.round_step, kMinBid, kMaxBid);
        if (opts.efficiency_sd > 0)
          a.efficiency = opts.efficiency_sd * Rng::stream(seed, a.worker_id).normal();
        a.measured = a.effort / std::exp(a.efficiency);
        a.noise = std::sqrt(sp.noise_var) * rng.normal();
        a.signal = signal_mean(a.effort, sp) + a.noise;
        a.considered = rng.bernoulli(consideration(g));
        job.applications.push_back(std::move(a));
      }
    }
    deltas.clear();
    slot_of.clear();
    for (std::size_t j = 0; j < job.applications.size(); ++j) {
      auto& a = job.applications[j];
      a.perceived_ability = employer_view(a);
      if (!a.considered) continue;
      deltas.push_back(params.t(a.group) + params.beta * a.perceived_ability - params.alpha * a.bid);
      slot_of.push_back(static_cast<int>(j));
    }
    const auto probs = choice_probabilities(deltas, params.pi);
    job.outside_probability = probs[0];
    job.probability_sum_error =
        std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0);
    job.abandoned = !rng.bernoulli(params.pi);
    if (!job.abandoned) {
      const int k = choose_winner(deltas, 1.0, rng);
      if (k >= 0) {
        job.winner = slot_of[k];
        job.applications[job.winner].won = true;
      }
    }
  }
  return jobs;
}

namespace {

template <typename F>
double golden_max(F f, double lo, double hi, double tol, double* best) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  *best = std::max(f1, f2);
  return f1 > f2 ? x1 : x2;
}

struct EffortChoice {
  double effort, payoff;
};

EffortChoice best_effort(const WinSurface& s, GroupId g, double b, double c, double a) {
  const double exp_a = std::exp(a);
  auto payoff = [&](double u) {
    const double e = std::exp(u);
    return s.eval(b, e, g).p * (b - c) - e * e / (2 * exp_a);
  };
  const double lo = std::log(kEffortFloor), hi = std::log(kMaxEffort);
  constexpr int kScan = 16;
  int best = 0;
  double best_v = -INFINITY;
  for (int k = 0; k < kScan; ++k) {
    const double v = payoff(lo + (hi - lo) * k / (kScan - 1));
    if (v > best_v) best_v = v, best = k;
  }
  const double step = (hi - lo) / (kScan - 1);
  double v = 0;
  const double u = golden_max(payoff, std::max(lo, lo + step * (best - 1)),
                              std::min(hi, lo + step * (best + 1)), 1e-8, &v);
  EffortChoice out{std::exp(u), v};
  if (best_v > out.payoff) out = {std::exp(lo + step * best), best_v};
  const double at_floor = payoff(lo);
  if (at_floor >= out.payoff) out = {kEffortFloor, at_floor};
  return out;
}

}  // namespace

BestResponse best_response(const WinSurface& surface, GroupId g, double cost, double ability) {
  auto value = [&](double b) { return best_effort(surface, g, b, cost, ability); };
  constexpr int kScan = 45;
  const double step = (kMaxBid - kMinBid) / (kScan - 1);
  int best = 0;
  EffortChoice best_v{kEffortFloor, -INFINITY};
  for (int k = 0; k < kScan; ++k) {
    const auto v = value(kMinBid + step * k);
    if (v.payoff >= best_v.payoff) best_v = v, best = k;
  }
  BestResponse br{kMinBid + step * best, best_v.effort, best_v.payoff};
  // dV/db by the envelope theorem.
  auto foc = [&](double b) {
    const auto ec = value(b);
    const auto pt = surface.eval(b, ec.effort, g);
    return pt.p + pt.dp_db * (b - cost);
  };
  double lo = std::max(kMinBid, br.bid - step), hi = std::min(kMaxBid, br.bid + step);
  double flo = foc(lo), fhi = foc(hi);
  double cand = br.bid;
  if (flo > 0 && fhi < 0) {
    for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
      const double mid = 0.5 * (lo + hi);
      (foc(mid) > 0 ? lo : hi) = mid;
    }
    cand = 0.5 * (lo + hi);
  } else {
    double v = 0;
    cand = golden_max([&](double b) { return value(b).payoff; }, lo, hi, 1e-9, &v);
  }
  const auto cv = value(cand);
  if (cv.payoff > br.payoff) br = {cand, cv.effort, cv.payoff};
  return br;
}

StrategyProfile calibrate_strategy_from_focs(const TypeDistribution& types,
                                             const WinSurface& surface,
                                             const std::vector<GroupId>& groups, int nodes) {
  StrategyProfile profile;
  for (GroupId g : groups) {
    const auto& d = types.group(g);
    GroupStrategy gs;
    for (int k = 0; k < nodes; ++k) {
      const double u = (k + 0.5) / nodes;
      gs.cost_nodes.push_back(d.cost.quantile(u));
      gs.ability_nodes.push_back(d.ability.quantile(u));
    }
    auto dedupe = [](std::vector<double>& v) { v.erase(std::unique(v.begin(), v.end()), v.end()); };
    dedupe(gs.cost_nodes);
    dedupe(gs.ability_nodes);
    for (double c : gs.cost_nodes) {
      for (double a : gs.ability_nodes) {
        const auto br = best_response(surface, g, c, a);
        if (!std::isfinite(br.payoff))
          throw std::runtime_error("non-finite payoff while calibrating group " + group_label(g));
        gs.bid.push_back(br.bid);
        gs.effort.push_back(br.effort);
      }
    }
    profile.groups[g] = std::move(gs);
  }
  return profile;
}

}  // namespace lmsig
