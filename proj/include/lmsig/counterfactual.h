#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lmsig/beliefs.h"
#include "lmsig/demand.h"
#include "lmsig/groups.h"
#include "lmsig/simulator.h"

namespace lmsig {

enum class Scenario { kStatusQuo, kNoSignaling, kFullInformation };
std::string_view to_string(Scenario s);

struct SolverConfig {
  double damping = 0.5;
  double tol = 0.05;  // dollars, sup-norm of the undamped best-response change
  int max_iter = 200;
  int pool_jobs = 2000;
  int cost_nodes = 40;  // NS grid
  int fi_nodes = 25;    // FI grid per dimension
  double bid_step = 1.0;  // spacing of the cached win-probability grid
  std::uint64_t seed = 1;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;        // last undamped change on the cached surface
  double exact_residual = 0.0;  // one exact best-response pass on the returned strategy
  std::vector<double> history;
  std::string diagnostic;
};

struct EquilibriumSolution {
  StrategyProfile strategy;  // effort fixed at the floor; no signaling cost
  ConvergenceReport report;
  // Second start at cost + $50; max bid difference between the two fixed points.
  StrategyProfile alternative;
  ConvergenceReport alternative_report;
  double start_gap = 0.0;
};

// Index parameters of the bid-only markets.
ModelParams market_params(const StructuralParams& p, const GroupMap<SignalProduction>& signal);

// No signaling: employers score T(x) + beta E[a | x] + alpha b. Strategies over cost.
EquilibriumSolution solve_ns_equilibrium(const TypeDistribution& types,
                                         const ArrivalDistribution& arrival,
                                         const ConsiderationRates& consideration,
                                         const StructuralParams& params,
                                         const GroupMap<double>& group_means,
                                         const SolverConfig& cfg = {});

// Full information: employers score T(x) + beta a + alpha b. Strategies over (cost,
// ability), solved on the effective bid b - (beta / |alpha|) a.
EquilibriumSolution solve_fi_equilibrium(const TypeDistribution& types,
                                         const ArrivalDistribution& arrival,
                                         const ConsiderationRates& consideration,
                                         const StructuralParams& params,
                                         const SolverConfig& cfg = {});

// Status-quo actions by nearest recovered type (standardized within group).
struct Donor {
  double cost = 0.0, ability = 0.0, bid = 0.0, effort = 0.0;
};

class DonorStrategy final : public ActionRule {
 public:
  explicit DonorStrategy(GroupMap<std::vector<Donor>> donors);
  // Groups without donors fall back to the pooled table.
  std::pair<double, double> act(GroupId g, double cost, double ability) const override;
  bool has_group(GroupId g) const { return tables_.count(g) > 0; }

 private:
  struct Table {
    std::vector<Donor> donors;  // sorted by standardized cost
    std::vector<double> zc, za;
    double mc = 0, sc = 1, ma = 0, sa = 1;
  };
  static Table make_table(std::vector<Donor> donors);
  static const Donor& nearest(const Table& t, double cost, double ability);
  GroupMap<Table> tables_;
  Table pooled_;
};

struct QuintileCuts {
  std::array<double, 4> ability{}, cost{};
  int ability_cell(double a) const;
  int cost_cell(double c) const;
};

QuintileCuts quintile_cuts(const std::vector<SimJob>& jobs);

using Matrix5 = std::array<std::array<double, 5>, 5>;  // [ability quintile][cost quintile]

struct WelfareReport {
  Scenario scenario = Scenario::kStatusQuo;
  int n_jobs = 0;
  double hiring_rate = 0.0;
  double conditional_hiring_rate = 0.0;
  double mean_winning_bid = 0.0;
  double worker_surplus = 0.0;  // per job
  double employer_surplus = 0.0;
  double total_surplus = 0.0;
  double writing_costs = 0.0;
  Matrix5 hire_rate{};       // P(hired | cell)
  Matrix5 hired_share{};     // P(cell | hired)
  Matrix5 applicants{};      // counts per cell
  std::array<double, 5> ability_hire_rate{};  // P(hired | ability quintile)
  std::array<double, 5> cost_hire_rate{};
};

// Per-job averages. Writing costs are charged only in the status quo. Employer
// surplus is pi log(1 + sum exp delta) / |alpha| with the employer's index.
WelfareReport welfare_report(const std::vector<SimJob>& jobs, const ModelParams& params,
                             Scenario scenario, const QuintileCuts& cuts);

// 100 (b - a) / a cellwise; cells with a = 0 give 0.
Matrix5 percent_change(const Matrix5& from, const Matrix5& to);

struct StatusQuoResult {
  std::vector<SimJob> jobs;
  WelfareReport report;
  std::vector<std::string> diagnostics;
};

StatusQuoResult simulate_sq(const DonorStrategy& strategy, const BeliefFunction& beliefs,
                            const ModelParams& params, const ArrivalDistribution& arrival,
                            const TypeDistribution& types, const ConsiderationRates& consideration,
                            int n_jobs, std::uint64_t seed, const QuintileCuts* cuts = nullptr);

}  // namespace lmsig
