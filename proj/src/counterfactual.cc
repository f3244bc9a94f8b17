#include "lmsig/counterfactual.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lmsig/generator.h"

namespace lmsig {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kStatusQuo: return "SQ";
    case Scenario::kNoSignaling: return "NS";
    case Scenario::kFullInformation: return "FI";
  }
  return "?";
}

ModelParams market_params(const StructuralParams& p, const GroupMap<SignalProduction>& signal) {
  ModelParams m;
  m.alpha = disutility_from_alpha_signed(p.alpha_signed);
  m.beta = p.beta;
  m.t_by_group = p.t_by_group;
  m.pi = p.pi;
  m.signal = signal;
  return m;
}

namespace {

struct PoolApp {
  GroupId group;
  double cost = 0.0, ability = 0.0;
  bool considered = false;
};

using PoolJob = std::vector<PoolApp>;

// Jobs, types and consideration flags are drawn once and reused by every
// iteration and both starting points.
std::vector<PoolJob> draw_pool(const TypeDistribution& types, const ArrivalDistribution& arrival,
                               const ConsiderationRates& consideration, int n, std::uint64_t seed) {
  arrival.validate();
  std::vector<PoolJob> jobs(n);
  for (int m = 0; m < n; ++m) {
    Rng rng = Rng::stream(seed, "counterfactual-pool", static_cast<std::uint64_t>(m));
    for (const auto& [g, count] : arrival.sample(rng)) {
      for (int k = 0; k < count; ++k) {
        PoolApp a;
        a.group = g;
        std::tie(a.cost, a.ability) = types.sample(g, rng);
        a.considered = rng.bernoulli(consideration(g));
        jobs[m].push_back(a);
      }
    }
  }
  return jobs;
}

// Bid-only market. The employer weight of a bid b is exp(h(x) + alpha_signed * y)
// with y = b - shift(a); shift is zero without information on ability and
// beta a / |alpha| when ability is observed.
struct BidMarket {
  double alpha_signed = -0.01;
  double pi = 0.5;
  double beta = 0.0;
  GroupMap<double> h;
  bool full_info = false;

  double shift(double a) const { return full_info ? beta * a / -alpha_signed : 0.0; }
  double weight(GroupId g, double b, double a) const {
    return std::exp(h.at(g) + alpha_signed * (b - shift(a)));
  }
};

// Competitor sums faced by the slots of one group.
struct GroupSlots {
  double h = 0.0;
  std::vector<double> others;  // considered slots only
  int n = 0;                   // all slots

  // (P, dP/dy) at effective bid y.
  std::pair<double, double> eval(double y, double alpha_signed, double pi) const {
    if (n == 0) return {0.0, 0.0};
    const double w = std::exp(h + alpha_signed * y);
    double sp = 0, sd = 0;
    for (double d : others) {
      const double den = 1 + d + w;
      sp += w / den;
      sd += (1 + d) * w / (den * den);
    }
    return {pi * sp / n, pi * alpha_signed * sd / n};
  }
};

GroupMap<GroupSlots> build_slots(const BidMarket& market, const std::vector<PoolJob>& pool,
                                 const StrategyProfile& strategy) {
  GroupMap<GroupSlots> out;
  std::vector<double> w;
  for (const auto& job : pool) {
    w.assign(job.size(), 0.0);
    double total = 0;
    for (std::size_t i = 0; i < job.size(); ++i) {
      const auto& a = job[i];
      if (!a.considered) continue;
      const double b = strategy.act(a.group, a.cost, a.ability).first;
      w[i] = market.weight(a.group, b, a.ability);
      total += w[i];
    }
    for (std::size_t i = 0; i < job.size(); ++i) {
      auto& gs = out[job[i].group];
      ++gs.n;
      if (job[i].considered) gs.others.push_back(total - w[i]);
    }
  }
  for (auto& [g, gs] : out) gs.h = market.h.at(g);
  return out;
}

// Cubic Hermite table of (P, dP/dy) on an evenly spaced grid; clamped outside.
class Curve {
 public:
  Curve(const GroupSlots& slots, const BidMarket& m, double lo, double hi, double step) {
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)) + 1);
    lo_ = lo;
    step_ = (hi - lo) / (n - 1);
    f_.resize(n);
    d_.resize(n);
    for (int k = 0; k < n; ++k) std::tie(f_[k], d_[k]) = slots.eval(lo + k * step_, m.alpha_signed, m.pi);
  }

  std::pair<double, double> operator()(double y) const {
    const int last = static_cast<int>(f_.size()) - 1;
    const double x = std::clamp((y - lo_) / step_, 0.0, double(last));
    const int k = std::min(static_cast<int>(x), last - 1);
    const double t = x - k, t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2,
                 h11 = t3 - t2;
    const double v = h00 * f_[k] + h10 * step_ * d_[k] + h01 * f_[k + 1] + h11 * step_ * d_[k + 1];
    const double dv = ((6 * t2 - 6 * t) * f_[k] + (3 * t2 - 4 * t + 1) * step_ * d_[k] +
                       (-6 * t2 + 6 * t) * f_[k + 1] + (3 * t2 - 2 * t) * step_ * d_[k + 1]) /
                      step_;
    return {v, dv};
  }

 private:
  double lo_ = 0, step_ = 1;
  std::vector<double> f_, d_;
};

// argmax over b in [30, 250] of P(b - s) (b - c): a scan on the bid grid, then
// bisection on the FOC (golden section when the bracket has no sign change).
// Ties go to the higher bid.
template <typename P>
double best_bid(const P& prob, double cost, double shift, double step) {
  auto payoff = [&](double b) { return prob(b - shift).first * (b - cost); };
  auto foc = [&](double b) {
    const auto [p, dp] = prob(b - shift);
    return p + dp * (b - cost);
  };
  const int n = static_cast<int>(std::round((kMaxBid - kMinBid) / step));
  double best_b = kMinBid, best_v = -1e300;
  for (int k = 0; k <= n; ++k) {
    const double b = k == n ? kMaxBid : kMinBid + k * step;
    const double v = payoff(b);
    if (v >= best_v) best_v = v, best_b = b;
  }
  const double lo = std::max(kMinBid, best_b - step), hi = std::min(kMaxBid, best_b + step);
  double cand;
  const double flo = foc(lo), fhi = foc(hi);
  if (hi == kMaxBid && best_b == kMaxBid && fhi >= 0) return kMaxBid;
  if (flo > 0 && fhi < 0) {
    double a = lo, z = hi;
    for (int it = 0; it < 60 && z - a > 1e-10; ++it) {
      const double mid = 0.5 * (a + z);
      (foc(mid) > 0 ? a : z) = mid;
    }
    cand = 0.5 * (a + z);
  } else {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double a = lo, z = hi;
    double x1 = z - r * (z - a), x2 = a + r * (z - a), f1 = payoff(x1), f2 = payoff(x2);
    while (z - a > 1e-9) {
      if (f1 <= f2) {
        a = x1, x1 = x2, f1 = f2, x2 = a + r * (z - a), f2 = payoff(x2);
      } else {
        z = x2, x2 = x1, f2 = f1, x1 = z - r * (z - a), f1 = payoff(x1);
      }
    }
    cand = 0.5 * (a + z);
  }
  return payoff(cand) > best_v ? cand : best_b;
}

struct NodeGrid {
  GroupId group;
  std::vector<double> cost, ability;
};

std::vector<double> quantile_nodes(const Marginal& m, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(m.quantile((k + 0.5) / n));
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct FixedPointResult {
  StrategyProfile strategy;
  ConvergenceReport report;
};

class BidSolver {
 public:
  BidSolver(BidMarket market, std::vector<PoolJob> pool, GroupMap<NodeGrid> grids,
            const SolverConfig& cfg)
      : market_(std::move(market)), pool_(std::move(pool)), grids_(std::move(grids)), cfg_(cfg) {
    double smin = 0, smax = 0;
    for (const auto& [g, grid] : grids_)
      for (double a : grid.ability) {
        smin = std::min(smin, market_.shift(a));
        smax = std::max(smax, market_.shift(a));
      }
    // Competitors off the grid use clamped bids, so the node shifts bound y.
    y_lo_ = kMinBid - smax;
    y_hi_ = kMaxBid - smin;
  }

  StrategyProfile initial(double markup) const {
    StrategyProfile s;
    for (const auto& [g, grid] : grids_) {
      GroupStrategy gs;
      gs.cost_nodes = grid.cost;
      gs.ability_nodes = grid.ability;
      for (double c : grid.cost)
        for (std::size_t j = 0; j < grid.ability.size(); ++j) {
          gs.bid.push_back(std::clamp(c + markup, kMinBid, kMaxBid));
          gs.effort.push_back(kEffortFloor);
        }
      s.groups[g] = std::move(gs);
    }
    return s;
  }

  // Best responses at every node; the cached curve or the exact pool average.
  GroupMap<std::vector<double>> best_responses(const StrategyProfile& s, bool exact) const {
    const auto slots = build_slots(market_, pool_, s);
    GroupMap<std::vector<double>> out;
    for (const auto& [g, grid] : grids_) {
      auto it = slots.find(g);
      const GroupSlots empty{market_.h.at(g), {}, 0};
      const GroupSlots& gs = it == slots.end() ? empty : it->second;
      auto& br = out[g];
      if (exact) {
        auto prob = [&](double y) { return gs.eval(y, market_.alpha_signed, market_.pi); };
        for (double c : grid.cost)
          for (double a : grid.ability) br.push_back(best_bid(prob, c, market_.shift(a), cfg_.bid_step));
      } else {
        const Curve curve(gs, market_, y_lo_, y_hi_, cfg_.bid_step);
        for (double c : grid.cost)
          for (double a : grid.ability)
            br.push_back(best_bid(curve, c, market_.shift(a), cfg_.bid_step));
      }
    }
    return out;
  }

  static double max_change(const StrategyProfile& s, const GroupMap<std::vector<double>>& br) {
    double r = 0;
    for (const auto& [g, v] : br) {
      const auto& bid = s.groups.at(g).bid;
      for (std::size_t k = 0; k < v.size(); ++k) r = std::max(r, std::abs(v[k] - bid[k]));
    }
    return r;
  }

  FixedPointResult solve(double markup) const {
    FixedPointResult out;
    out.strategy = initial(markup);
    auto& rep = out.report;
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      const auto br = best_responses(out.strategy, false);
      const double res = max_change(out.strategy, br);
      rep.iterations = it;
      rep.residual = res;
      rep.history.push_back(res);
      // Stop a margin inside the tolerance so the exact pass can confirm it.
      if (res < 0.5 * cfg_.tol) {
        rep.exact_residual = max_change(out.strategy, best_responses(out.strategy, true));
        if (rep.exact_residual < cfg_.tol) {
          rep.converged = true;
          return out;
        }
      }
      for (auto& [g, gs] : out.strategy.groups) {
        const auto& v = br.at(g);
        for (std::size_t k = 0; k < v.size(); ++k) gs.bid[k] += cfg_.damping * (v[k] - gs.bid[k]);
      }
    }
    rep.exact_residual = max_change(out.strategy, best_responses(out.strategy, true));
    std::ostringstream msg;
    msg << "no fixed point within " << cfg_.max_iter << " iterations; residual " << rep.residual;
    const auto& h = rep.history;
    if (h.size() >= 20) {
      const double recent = *std::min_element(h.end() - 10, h.end());
      const double before = *std::min_element(h.end() - 20, h.end() - 10);
      if (recent > 0.9 * before) msg << "; residual stalled over the last 20 iterations (oscillation)";
    }
    rep.diagnostic = msg.str();
    return out;
  }

 private:
  BidMarket market_;
  std::vector<PoolJob> pool_;
  GroupMap<NodeGrid> grids_;
  SolverConfig cfg_;
  double y_lo_ = kMinBid, y_hi_ = kMaxBid;
};

std::set<GroupId> arrival_groups(const ArrivalDistribution& arrival) {
  std::set<GroupId> out;
  for (const auto& comp : arrival.compositions)
    for (const auto& [g, n] : comp)
      if (n > 0) out.insert(g);
  return out;
}

void check_params(const StructuralParams& p) {
  if (!(p.alpha_signed < 0)) throw std::invalid_argument("alpha_signed must be negative");
  if (!(p.pi > 0 && p.pi <= 1)) throw std::invalid_argument("pi must lie in (0, 1]");
}

EquilibriumSolution run_both_starts(const BidSolver& solver) {
  EquilibriumSolution sol;
  auto a = solver.solve(0.0);
  auto b = solver.solve(50.0);
  sol.strategy = std::move(a.strategy);
  sol.report = std::move(a.report);
  sol.alternative = std::move(b.strategy);
  sol.alternative_report = std::move(b.report);
  for (const auto& [g, gs] : sol.strategy.groups) {
    const auto& other = sol.alternative.groups.at(g).bid;
    for (std::size_t k = 0; k < gs.bid.size(); ++k)
      sol.start_gap = std::max(sol.start_gap, std::abs(gs.bid[k] - other[k]));
  }
  return sol;
}

}  // namespace

EquilibriumSolution solve_ns_equilibrium(const TypeDistribution& types,
                                         const ArrivalDistribution& arrival,
                                         const ConsiderationRates& consideration,
                                         const StructuralParams& params,
                                         const GroupMap<double>& group_means,
                                         const SolverConfig& cfg) {
  check_params(params);
  BidMarket m;
  m.alpha_signed = params.alpha_signed;
  m.pi = params.pi;
  m.beta = params.beta;
  GroupMap<NodeGrid> grids;
  for (GroupId g : arrival_groups(arrival)) {
    auto it = group_means.find(g);
    if (it == group_means.end()) throw std::out_of_range("no ability mean for group " + group_label(g));
    m.h[g] = params.t(g) + params.beta * it->second;
    grids[g] = {g, quantile_nodes(types.group(g).cost, cfg.cost_nodes), {0.0}};
  }
  const BidSolver solver(m, draw_pool(types, arrival, consideration, cfg.pool_jobs, cfg.seed),
                         std::move(grids), cfg);
  return run_both_starts(solver);
}

EquilibriumSolution solve_fi_equilibrium(const TypeDistribution& types,
                                         const ArrivalDistribution& arrival,
                                         const ConsiderationRates& consideration,
                                         const StructuralParams& params,
                                         const SolverConfig& cfg) {
  check_params(params);
  BidMarket m;
  m.alpha_signed = params.alpha_signed;
  m.pi = params.pi;
  m.beta = params.beta;
  m.full_info = true;
  GroupMap<NodeGrid> grids;
  for (GroupId g : arrival_groups(arrival)) {
    m.h[g] = params.t(g);
    const auto& d = types.group(g);
    grids[g] = {g, quantile_nodes(d.cost, cfg.fi_nodes), quantile_nodes(d.ability, cfg.fi_nodes)};
  }
  const BidSolver solver(m, draw_pool(types, arrival, consideration, cfg.pool_jobs, cfg.seed),
                         std::move(grids), cfg);
  return run_both_starts(solver);
}

DonorStrategy::Table DonorStrategy::make_table(std::vector<Donor> donors) {
  Table t;
  const double n = static_cast<double>(donors.size());
  for (const auto& d : donors) t.mc += d.cost / n, t.ma += d.ability / n;
  double vc = 0, va = 0;
  for (const auto& d : donors) {
    vc += (d.cost - t.mc) * (d.cost - t.mc) / n;
    va += (d.ability - t.ma) * (d.ability - t.ma) / n;
  }
  t.sc = vc > 0 ? std::sqrt(vc) : 1.0;
  t.sa = va > 0 ? std::sqrt(va) : 1.0;
  std::stable_sort(donors.begin(), donors.end(),
                   [](const Donor& x, const Donor& y) { return x.cost < y.cost; });
  for (const auto& d : donors) {
    t.zc.push_back((d.cost - t.mc) / t.sc);
    t.za.push_back((d.ability - t.ma) / t.sa);
  }
  t.donors = std::move(donors);
  return t;
}

DonorStrategy::DonorStrategy(GroupMap<std::vector<Donor>> donors) {
  std::vector<Donor> all;
  for (auto& [g, v] : donors) {
    if (v.empty()) continue;
    all.insert(all.end(), v.begin(), v.end());
    tables_[g] = make_table(std::move(v));
  }
  if (all.empty()) throw std::invalid_argument("donor pool is empty");
  pooled_ = make_table(std::move(all));
}

const Donor& DonorStrategy::nearest(const Table& t, double cost, double ability) {
  const double zc = (cost - t.mc) / t.sc, za = (ability - t.ma) / t.sa;
  const std::size_t n = t.zc.size();
  std::size_t start = std::lower_bound(t.zc.begin(), t.zc.end(), zc) - t.zc.begin();
  std::size_t best = std::min(start, n - 1);
  double best_d = 1e300;
  auto dist = [&](std::size_t i) {
    return (t.zc[i] - zc) * (t.zc[i] - zc) + (t.za[i] - za) * (t.za[i] - za);
  };
  // Walk outward in cost order until the cost gap alone exceeds the best distance.
  for (std::size_t i = start; i < n; ++i) {
    if ((t.zc[i] - zc) * (t.zc[i] - zc) > best_d) break;
    if (const double d = dist(i); d < best_d) best_d = d, best = i;
  }
  for (std::size_t i = start; i-- > 0;) {
    if ((t.zc[i] - zc) * (t.zc[i] - zc) > best_d) break;
    if (const double d = dist(i); d < best_d) best_d = d, best = i;
  }
  return t.donors[best];
}

std::pair<double, double> DonorStrategy::act(GroupId g, double cost, double ability) const {
  auto it = tables_.find(g);
  const Donor& d = nearest(it == tables_.end() ? pooled_ : it->second, cost, ability);
  return {d.bid, d.effort};
}

int QuintileCuts::ability_cell(double a) const {
  return static_cast<int>(std::upper_bound(ability.begin(), ability.end(), a) - ability.begin());
}

int QuintileCuts::cost_cell(double c) const {
  return static_cast<int>(std::upper_bound(cost.begin(), cost.end(), c) - cost.begin());
}

QuintileCuts quintile_cuts(const std::vector<SimJob>& jobs) {
  std::vector<double> a, c;
  for (const auto& job : jobs)
    for (const auto& app : job.applications) a.push_back(app.ability), c.push_back(app.cost);
  if (a.empty()) throw std::invalid_argument("no applications to compute quintiles");
  std::sort(a.begin(), a.end());
  std::sort(c.begin(), c.end());
  QuintileCuts q;
  for (int k = 0; k < 4; ++k) {
    const auto idx = static_cast<std::size_t>(std::ceil((k + 1) * 0.2 * double(a.size()))) - 1;
    q.ability[k] = a[idx];
    q.cost[k] = c[idx];
  }
  return q;
}

WelfareReport welfare_report(const std::vector<SimJob>& jobs, const ModelParams& params,
                             Scenario scenario, const QuintileCuts& cuts) {
  WelfareReport r;
  r.scenario = scenario;
  r.n_jobs = static_cast<int>(jobs.size());
  if (jobs.empty()) return r;
  int hires = 0, open = 0;
  double bid_sum = 0;
  Matrix5 hired{};
  std::array<double, 5> hired_a{}, hired_c{}, apps_a{}, apps_c{};
  for (const auto& job : jobs) {
    if (!job.abandoned) ++open;
    double inclusive = 1.0;
    for (const auto& app : job.applications) {
      const int ia = cuts.ability_cell(app.ability), ic = cuts.cost_cell(app.cost);
      r.applicants[ia][ic] += 1;
      apps_a[ia] += 1;
      apps_c[ic] += 1;
      if (scenario == Scenario::kStatusQuo) r.writing_costs += effort_cost(app.effort, app.ability);
      if (app.considered)
        inclusive += std::exp(params.t(app.group) + params.beta * app.perceived_ability -
                              params.alpha * app.bid);
      if (app.won) {
        ++hires;
        bid_sum += app.bid;
        r.worker_surplus += app.bid - app.cost;
        hired[ia][ic] += 1;
        hired_a[ia] += 1;
        hired_c[ic] += 1;
      }
    }
    r.employer_surplus += params.pi * std::log(inclusive) / params.alpha;
  }
  const double n = static_cast<double>(jobs.size());
  r.worker_surplus = (r.worker_surplus - r.writing_costs) / n;
  r.writing_costs /= n;
  r.employer_surplus /= n;
  r.total_surplus = r.worker_surplus + r.employer_surplus;
  r.hiring_rate = hires / n;
  r.conditional_hiring_rate = open > 0 ? double(hires) / open : 0.0;
  r.mean_winning_bid = hires > 0 ? bid_sum / hires : 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      r.hire_rate[i][j] = r.applicants[i][j] > 0 ? hired[i][j] / r.applicants[i][j] : 0.0;
      r.hired_share[i][j] = hires > 0 ? hired[i][j] / hires : 0.0;
    }
    r.ability_hire_rate[i] = apps_a[i] > 0 ? hired_a[i] / apps_a[i] : 0.0;
    r.cost_hire_rate[i] = apps_c[i] > 0 ? hired_c[i] / apps_c[i] : 0.0;
  }
  return r;
}

Matrix5 percent_change(const Matrix5& from, const Matrix5& to) {
  Matrix5 out{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      out[i][j] = from[i][j] != 0 ? 100.0 * (to[i][j] - from[i][j]) / from[i][j] : 0.0;
  return out;
}

StatusQuoResult simulate_sq(const DonorStrategy& strategy, const BeliefFunction& beliefs,
                            const ModelParams& params, const ArrivalDistribution& arrival,
                            const TypeDistribution& types, const ConsiderationRates& consideration,
                            int n_jobs, std::uint64_t seed, const QuintileCuts* cuts) {
  StatusQuoResult out;
  for (GroupId g : arrival_groups(arrival))
    if (!strategy.has_group(g))
      out.diagnostics.push_back("no donors in group " + group_label(g) +
                                "; nearest type taken from the pooled donors");
  MarketOptions opts;
  opts.job_prefix = "sq";
  out.jobs = simulate_market(n_jobs, arrival, types, strategy, params, consideration,
                             belief_view(beliefs), seed, opts);
  const QuintileCuts own = cuts ? *cuts : quintile_cuts(out.jobs);
  out.report = welfare_report(out.jobs, params, Scenario::kStatusQuo, own);
  return out;
}

}  // namespace lmsig
