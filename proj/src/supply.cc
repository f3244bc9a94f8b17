#include "lmsig/supply.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lmsig {

SignalProductionFit estimate_signal_production(const std::vector<EffortObservation>& obs) {
  SignalProductionFit fit;
  fit.residuals.assign(obs.size(), 0.0);
  GroupMap<std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i].minutes > 0.0)) throw std::invalid_argument("effort must be positive");
    by_group[obs[i].group].push_back(i);
  }
  for (const auto& [g, idx] : by_group) {
    const std::string label = group_label(g);
    std::map<std::string, std::vector<std::size_t>> by_worker;
    for (std::size_t i : idx) by_worker[obs[i].worker_id].push_back(i);

    double sxy = 0, sxx = 0;
    int n_within = 0, n_workers = 0;
    for (const auto& [w, rows] : by_worker) {
      if (rows.size() < 2) continue;
      double mx = 0, my = 0;
      for (std::size_t i : rows) mx += std::log(obs[i].minutes), my += obs[i].signal;
      mx /= double(rows.size());
      my /= double(rows.size());
      for (std::size_t i : rows) {
        const double dx = std::log(obs[i].minutes) - mx, dy = obs[i].signal - my;
        sxy += dx * dy;
        sxx += dx * dx;
      }
      n_within += static_cast<int>(rows.size());
      ++n_workers;
    }

    SignalProduction sp;
    const bool fe = n_workers >= 2 && sxx > 0;
    double ss = 0;
    int dof = 0;
    if (fe) {
      sp.gamma = sxy / sxx;
      for (const auto& [w, rows] : by_worker) {
        if (rows.size() < 2) continue;
        double mx = 0, my = 0;
        for (std::size_t i : rows) mx += std::log(obs[i].minutes), my += obs[i].signal;
        mx /= double(rows.size());
        my /= double(rows.size());
        for (std::size_t i : rows) {
          const double u = obs[i].signal - my - sp.gamma * (std::log(obs[i].minutes) - mx);
          ss += u * u;
        }
      }
      dof = n_within - n_workers - 1;
    } else {
      double mx = 0, my = 0;
      for (std::size_t i : idx) mx += std::log(obs[i].minutes), my += obs[i].signal;
      mx /= double(idx.size());
      my /= double(idx.size());
      double pxy = 0, pxx = 0;
      for (std::size_t i : idx) {
        const double dx = std::log(obs[i].minutes) - mx;
        pxy += dx * (obs[i].signal - my);
        pxx += dx * dx;
      }
      if (!(pxx > 0)) throw std::invalid_argument(label + ": no variation in log effort");
      sp.gamma = pxy / pxx;
      fit.diagnostics.push_back(label + ": worker effects infeasible, pooled OLS");
    }
    double sum = 0;
    for (std::size_t i : idx) sum += obs[i].signal - sp.gamma * std::log(obs[i].minutes);
    sp.k = sum / double(idx.size());
    for (std::size_t i : idx)
      fit.residuals[i] = obs[i].signal - sp.k - sp.gamma * std::log(obs[i].minutes);
    if (!fe) {
      for (std::size_t i : idx) ss += fit.residuals[i] * fit.residuals[i];
      dof = static_cast<int>(idx.size()) - 2;
    }
    sp.noise_var = dof > 0 ? ss / dof : 0.0;
    if (!(sp.gamma > 0))
      fit.diagnostics.push_back(label + ": nonpositive effort slope " + std::to_string(sp.gamma));
    fit.production[g] = sp;
    fit.fixed_effects[g] = fe;
  }
  return fit;
}

EffortCorrection correct_effort(const std::vector<EffortObservation>& obs,
                                const SignalProductionFit& fit, double cap) {
  EffortCorrection out;
  out.cap = cap;
  if (obs.size() != fit.residuals.size())
    throw std::invalid_argument("correct_effort: residuals do not match observations");
  std::map<std::string, double> sum_wy;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const SignalProduction& sp = fit.production.at(obs[i].group);
    if (!(sp.gamma > 0) || !(sp.noise_var > 0)) continue;
    const double y = fit.residuals[i] / sp.gamma;
    const double w = sp.gamma * sp.gamma / sp.noise_var;
    auto& wk = out.workers[obs[i].worker_id];
    wk.precision += w;
    wk.n_obs += 1;
    sum_wy[obs[i].worker_id] += w * y;
  }
  for (auto& [id, wk] : out.workers) wk.raw_mean = sum_wy[id] / wk.precision;

  double sw = 0, swx = 0;
  int j2 = 0;
  for (const auto& [id, wk] : out.workers) {
    if (wk.n_obs < 2) continue;
    sw += wk.precision;
    swx += wk.precision * wk.raw_mean;
    ++j2;
  }
  if (j2 >= 2) {
    const double m = swx / sw;
    double var = 0;
    for (const auto& [id, wk] : out.workers)
      if (wk.n_obs >= 2) var += wk.precision * (wk.raw_mean - m) * (wk.raw_mean - m);
    var /= sw;
    out.v_eta = std::max(var - double(j2) / sw, 0.0);
  }
  for (auto& [id, wk] : out.workers) {
    const double shrink = out.v_eta * wk.precision / (1.0 + out.v_eta * wk.precision);
    wk.posterior = shrink * wk.raw_mean;
    wk.shift = std::clamp(wk.posterior, -cap, cap);
  }
  out.corrected_minutes.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    auto it = out.workers.find(obs[i].worker_id);
    const double shift = it == out.workers.end() ? 0.0 : it->second.shift;
    out.corrected_minutes[i] = obs[i].minutes * std::exp(shift);
  }
  return out;
}

TypeEstimate invert_foc(const SurfacePoint& pt, double bid, double effort) {
  TypeEstimate t;
  t.p = pt.p;
  t.dp_db = pt.dp_db;
  t.dp_de = pt.dp_de;
  if (!(effort > 0) || !std::isfinite(effort)) t.reject_reason = "nonpositive_effort";
  else if (!std::isfinite(pt.p) || !std::isfinite(pt.dp_db) || !std::isfinite(pt.dp_de))
    t.reject_reason = "nonfinite_surface";
  else if (!(pt.p > 0)) t.reject_reason = "zero_win_probability";
  else if (!(pt.dp_db < 0)) t.reject_reason = "bid_derivative_not_negative";
  else if (!(pt.dp_de > 0)) t.reject_reason = "effort_derivative_not_positive";
  if (!t.reject_reason.empty()) return t;
  const double markup = -pt.p / pt.dp_db;
  const double a = std::log(effort) - std::log(pt.dp_de * markup);
  if (!std::isfinite(markup) || !std::isfinite(a)) {
    t.reject_reason = "nonfinite_type";
    return t;
  }
  t.cost = bid - markup;
  t.ability = a;
  return t;
}

std::vector<TypeEstimate> invert_focs(const WinSurface& surface,
                                      const std::vector<InversionInput>& inputs) {
  std::vector<TypeEstimate> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (!surface.has_group(in.group)) {
      TypeEstimate t;
      t.reject_reason = "group_not_in_pool";
      out.push_back(t);
      continue;
    }
    if (!(in.effort > 0)) {
      out.push_back(invert_foc({}, in.bid, in.effort));
      continue;
    }
    out.push_back(invert_foc(surface.eval(in.bid, in.effort, in.group), in.bid, in.effort));
  }
  return out;
}

}  // namespace lmsig
