#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/win_probability.h"

namespace lmsig {

// One application with a valid effort measurement.
struct EffortObservation {
  std::string worker_id;
  GroupId group;
  double signal = 0.0;
  double minutes = 0.0;  // raw measured time, > 0
};

struct SignalProductionFit {
  GroupMap<SignalProduction> production;
  GroupMap<bool> fixed_effects;   // false where the pooled fallback was used
  std::vector<double> residuals;  // s - K - gamma log t, parallel to the input
  std::vector<std::string> diagnostics;
};

// Per group OLS of signal on log time with worker effects (within transformation
// over workers with at least two observations); pooled OLS when that is infeasible.
SignalProductionFit estimate_signal_production(const std::vector<EffortObservation>& obs);

struct EffortCorrection {
  double v_eta = 0.0;
  double cap = 1.25;
  struct Worker {
    double precision = 0.0;  // S_j
    double raw_mean = 0.0;   // precision-weighted mean of r / gamma
    double posterior = 0.0;  // shrunk estimate
    double shift = 0.0;      // clipped log-effort shift
    int n_obs = 0;
  };
  std::map<std::string, Worker> workers;
  std::vector<double> corrected_minutes;  // parallel to the input
};

EffortCorrection correct_effort(const std::vector<EffortObservation>& obs,
                                const SignalProductionFit& fit, double cap = 1.25);

struct InversionInput {
  GroupId group;
  double bid = 0.0;
  double effort = 0.0;  // corrected minutes
};

struct TypeEstimate {
  std::optional<double> cost;
  std::optional<double> ability;
  std::string reject_reason;  // empty when accepted
  double p = 0.0, dp_db = 0.0, dp_de = 0.0;

  bool ok() const { return cost.has_value(); }
};

// Inverts the bid and effort first-order conditions at one observation.
// Precondition failures are returned as rejects.
TypeEstimate invert_foc(const SurfacePoint& pt, double bid, double effort);
std::vector<TypeEstimate> invert_focs(const WinSurface& surface,
                                      const std::vector<InversionInput>& inputs);

}  // namespace lmsig
