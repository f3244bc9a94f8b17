#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmsig/bid_signal.h"
#include "lmsig/demand.h"
#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/random.h"

namespace lmsig {

// Employer's signal component h(s; x) of the index h + alpha_signed * b. The
// reduced form uses the linear K + gamma * s; structural evaluation plugs in
// T + beta * mu(s).
struct SignalIndex {
  std::optional<GroupMap<double>> k, gamma;  // linear form when set
  // General form: value and derivative at s.
  std::function<std::pair<double, double>(double s, GroupId g)> general;

  static SignalIndex linear(GroupMap<double> k, GroupMap<double> gamma);
  static SignalIndex from_reduced_form(const ReducedFormParams& rf);

  bool is_linear() const { return k.has_value(); }
  std::pair<double, double> eval(double s, GroupId g) const;  // (h, dh/ds)
};

struct PoolSlot {
  bool considered = false;
  double delta_others = 0.0;  // sum of competitor weights in the same job
  double noise = 0.0;         // deviator's signal noise draw
};

// Competitor as drawn for one application in a pooled job.
struct CompetitorDraw {
  GroupId group;
  bool considered = false;
  double bid = 0.0;
  double signal = 0.0;
};

struct SimulationPool {
  double alpha_signed = 0.0;
  double pi = 0.5;
  SignalIndex index;
  GroupMap<SignalProduction> signal;  // production used for the deviator's signal
  GroupMap<std::vector<PoolSlot>> slots;
  int n_jobs = 0;
  std::vector<std::string> diagnostics;

  const std::vector<PoolSlot>& group_slots(GroupId g) const;

  // Rebuilds per-slot weight multipliers exp(gamma * noise) for a linear index.
  // Called by make_pool and after loading or editing slots.
  void prepare();
  const std::vector<double>* multipliers(GroupId g) const;

 private:
  GroupMap<std::vector<double>> mult_;
};

// Weights, leave-one-out sums and deviator noise for a set of simulated jobs.
SimulationPool make_pool(const std::vector<std::vector<CompetitorDraw>>& jobs, double alpha_signed,
                         double pi, SignalIndex index, GroupMap<SignalProduction> signal, Rng& rng);

// One source job: group and consideration flag of each application.
using Composition = std::vector<std::pair<GroupId, bool>>;

// Resamples M compositions with replacement and draws each application's
// (bid, signal) from the fitted bid/signal model.
SimulationPool build_pool(const std::vector<Composition>& source, const BidBinModel& bins,
                          const CopulaModel& copula, const ReducedFormParams& rf,
                          const GroupMap<SignalProduction>& signal, int m, Rng& rng);

struct SurfacePoint {
  double p = 0.0;
  double dp_db = 0.0;
  double dp_de = 0.0;
};

// Exact pool average. Any b and e > 0 are accepted; throws std::out_of_range
// for a group absent from the pool.
SurfacePoint win_probability_point(const SimulationPool& pool, double b, double e, GroupId g);
double win_probability(const SimulationPool& pool, double b, double e, GroupId g);
std::pair<double, double> win_probability_gradient(const SimulationPool& pool, double b, double e,
                                                   GroupId g);
// Monte Carlo standard errors of the value and both partials, from slot dispersion.
SurfacePoint win_probability_se(const SimulationPool& pool, double b, double e, GroupId g);

class WinSurface {
 public:
  virtual ~WinSurface() = default;
  virtual SurfacePoint eval(double b, double e, GroupId g) const = 0;
  virtual bool has_group(GroupId g) const = 0;
};

class ExactSurface final : public WinSurface {
 public:
  explicit ExactSurface(const SimulationPool& pool) : pool_(&pool) {}
  SurfacePoint eval(double b, double e, GroupId g) const override;
  bool has_group(GroupId g) const override;

 private:
  const SimulationPool* pool_;
};

// Bicubic Hermite interpolation on a (bid, log effort) tensor grid over
// [30, 250] x [1/15, 12]; inputs outside the box are clamped to it.
class CachedSurface final : public WinSurface {
 public:
  CachedSurface(const WinSurface& exact, const std::vector<GroupId>& groups, int n_bid = 45,
                int n_effort = 40);
  SurfacePoint eval(double b, double e, GroupId g) const override;
  bool has_group(GroupId g) const override { return tables_.count(g) > 0; }

 private:
  struct Table {
    std::vector<double> f, fb, fu, fbu;  // value and partials in (b, u = log e)
  };
  std::vector<double> b_, u_;
  GroupMap<Table> tables_;
};

}  // namespace lmsig
