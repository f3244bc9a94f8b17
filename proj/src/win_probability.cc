#include "lmsig/win_probability.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmsig {

SignalIndex SignalIndex::linear(GroupMap<double> k, GroupMap<double> gamma) {
  SignalIndex idx;
  idx.k = std::move(k);
  idx.gamma = std::move(gamma);
  return idx;
}

SignalIndex SignalIndex::from_reduced_form(const ReducedFormParams& rf) {
  return linear(rf.k_lambda, rf.gamma_lambda);
}

std::pair<double, double> SignalIndex::eval(double s, GroupId g) const {
  if (is_linear()) {
    auto ki = k->find(g);
    auto gi = gamma->find(g);
    if (ki == k->end() || gi == gamma->end())
      throw std::out_of_range("no index coefficients for group " + group_label(g));
    return {ki->second + gi->second * s, gi->second};
  }
  if (!general) throw std::logic_error("signal index has no form");
  return general(s, g);
}

const std::vector<PoolSlot>& SimulationPool::group_slots(GroupId g) const {
  auto it = slots.find(g);
  if (it == slots.end() || it->second.empty())
    throw std::out_of_range("group " + group_label(g) + " is absent from the pool");
  return it->second;
}

void SimulationPool::prepare() {
  mult_.clear();
  if (!index.is_linear()) return;
  for (const auto& [g, v] : slots) {
    auto gi = index.gamma->find(g);
    if (gi == index.gamma->end()) continue;
    auto& m = mult_[g];
    m.reserve(v.size());
    for (const auto& s : v) m.push_back(std::exp(gi->second * s.noise));
  }
}

const std::vector<double>* SimulationPool::multipliers(GroupId g) const {
  auto it = mult_.find(g);
  return it == mult_.end() ? nullptr : &it->second;
}

SimulationPool make_pool(const std::vector<std::vector<CompetitorDraw>>& jobs, double alpha_signed,
                         double pi, SignalIndex index, GroupMap<SignalProduction> signal,
                         Rng& rng) {
  SimulationPool pool;
  pool.alpha_signed = alpha_signed;
  pool.pi = pi;
  pool.index = std::move(index);
  pool.signal = std::move(signal);
  pool.n_jobs = static_cast<int>(jobs.size());
  std::vector<double> w;
  for (const auto& job : jobs) {
    w.assign(job.size(), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < job.size(); ++j) {
      if (!job[j].considered) continue;
      w[j] = std::exp(pool.index.eval(job[j].signal, job[j].group).first +
                      alpha_signed * job[j].bid);
      total += w[j];
    }
    for (std::size_t j = 0; j < job.size(); ++j) {
      const GroupId g = job[j].group;
      auto sp = pool.signal.find(g);
      if (sp == pool.signal.end())
        throw std::out_of_range("no signal production for pooled group " + group_label(g));
      PoolSlot slot;
      slot.considered = job[j].considered;
      slot.delta_others = std::max(0.0, total - w[j]);
      slot.noise = std::sqrt(std::max(sp->second.noise_var, 0.0)) * rng.normal();
      pool.slots[g].push_back(slot);
    }
  }
  pool.prepare();
  return pool;
}

SimulationPool build_pool(const std::vector<Composition>& source, const BidBinModel& bins,
                          const CopulaModel& copula, const ReducedFormParams& rf,
                          const GroupMap<SignalProduction>& signal, int m, Rng& rng) {
  if (source.empty()) throw std::invalid_argument("build_pool: no source compositions");
  std::vector<std::vector<CompetitorDraw>> jobs(m);
  for (auto& job : jobs) {
    const Composition& comp = source[rng.index(source.size())];
    job.reserve(comp.size());
    for (const auto& [g, considered] : comp) {
      CompetitorDraw d;
      d.group = g;
      d.considered = considered;
      std::tie(d.bid, d.signal) = sample_bid_signal(bins, copula, g, rng);
      job.push_back(d);
    }
  }
  SimulationPool pool =
      make_pool(jobs, rf.alpha_signed, rf.pi, SignalIndex::from_reduced_form(rf), signal, rng);
  if (m < 1000)
    pool.diagnostics.push_back("pool has " + std::to_string(m) +
                               " jobs; integration error may be material below 1000");
  return pool;
}

namespace {

struct SlotTerms {
  double share, d_omega_factor;  // phi and phi'(omega) * omega
};

inline SlotTerms slot_terms(double omega, double one_plus_delta) {
  if (!std::isfinite(omega)) return {1.0, 0.0};
  const double denom = one_plus_delta + omega;
  return {omega / denom, one_plus_delta * omega / (denom * denom)};
}

// Calls f(share, phi' * omega, dh/ds) for each considered slot of group g.
template <typename F>
std::size_t for_each_slot(const SimulationPool& pool, double b, double e, GroupId g, F f) {
  if (!(e > 0.0)) throw std::domain_error("effort must be positive");
  const auto& slots = pool.group_slots(g);
  const SignalProduction& sp = pool.signal.at(g);
  const double mean_s = sp.k + sp.gamma * std::log(e);
  if (const auto* mult = pool.multipliers(g)) {
    const auto [h, dh] = pool.index.eval(mean_s, g);
    const double base = std::exp(h + pool.alpha_signed * b);
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (!slots[j].considered) continue;
      const auto t = slot_terms(base * (*mult)[j], 1.0 + slots[j].delta_others);
      f(t.share, t.d_omega_factor, dh);
    }
  } else {
    for (const auto& slot : slots) {
      if (!slot.considered) continue;
      const auto [h, dh] = pool.index.eval(mean_s + slot.noise, g);
      const auto t = slot_terms(std::exp(h + pool.alpha_signed * b), 1.0 + slot.delta_others);
      f(t.share, t.d_omega_factor, dh);
    }
  }
  return slots.size();
}

}  // namespace

SurfacePoint win_probability_point(const SimulationPool& pool, double b, double e, GroupId g) {
  double sp = 0, sb = 0, se = 0;
  const double de_factor = pool.signal.at(g).gamma / e;
  const std::size_t n = for_each_slot(pool, b, e, g, [&](double share, double dw, double dh) {
    sp += share;
    sb += dw;
    se += dw * dh;
  });
  const double scale = pool.pi / double(n);
  return {scale * sp, scale * sb * pool.alpha_signed, scale * se * de_factor};
}

double win_probability(const SimulationPool& pool, double b, double e, GroupId g) {
  return win_probability_point(pool, b, e, g).p;
}

std::pair<double, double> win_probability_gradient(const SimulationPool& pool, double b, double e,
                                                   GroupId g) {
  const auto pt = win_probability_point(pool, b, e, g);
  return {pt.dp_db, pt.dp_de};
}

SurfacePoint win_probability_se(const SimulationPool& pool, double b, double e, GroupId g) {
  double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
  const double de_factor = pool.signal.at(g).gamma / e;
  const std::size_t n = for_each_slot(pool, b, e, g, [&](double share, double dw, double dh) {
    const double x[3] = {share, dw * pool.alpha_signed, dw * dh * de_factor};
    for (int k = 0; k < 3; ++k) s[k] += x[k], ss[k] += x[k] * x[k];
  });
  double out[3];
  const double nn = double(n);
  for (int k = 0; k < 3; ++k) {
    const double var = n > 1 ? (ss[k] - s[k] * s[k] / nn) / (nn - 1) : 0.0;
    out[k] = pool.pi * std::sqrt(std::max(var, 0.0) / nn);
  }
  return {out[0], out[1], out[2]};
}

SurfacePoint ExactSurface::eval(double b, double e, GroupId g) const {
  return win_probability_point(*pool_, b, e, g);
}

bool ExactSurface::has_group(GroupId g) const {
  auto it = pool_->slots.find(g);
  return it != pool_->slots.end() && !it->second.empty();
}

CachedSurface::CachedSurface(const WinSurface& exact, const std::vector<GroupId>& groups,
                             int n_bid, int n_effort) {
  if (n_bid < 2 || n_effort < 2) throw std::invalid_argument("cached surface needs a 2x2 grid");
  const double u_lo = std::log(kEffortFloor), u_hi = std::log(kMaxEffort);
  for (int i = 0; i < n_bid; ++i) b_.push_back(kMinBid + (kMaxBid - kMinBid) * i / (n_bid - 1));
  for (int j = 0; j < n_effort; ++j) u_.push_back(u_lo + (u_hi - u_lo) * j / (n_effort - 1));
  const double hb = 1e-3 * (b_[1] - b_[0]);
  for (GroupId g : groups) {
    Table t;
    const std::size_t n = b_.size() * u_.size();
    t.f.resize(n);
    t.fb.resize(n);
    t.fu.resize(n);
    t.fbu.resize(n);
    for (std::size_t i = 0; i < b_.size(); ++i) {
      for (std::size_t j = 0; j < u_.size(); ++j) {
        const double e = std::exp(u_[j]);
        const auto pt = exact.eval(b_[i], e, g);
        const auto up = exact.eval(b_[i] + hb, e, g);
        const auto dn = exact.eval(b_[i] - hb, e, g);
        if (!std::isfinite(pt.p) || !std::isfinite(pt.dp_db) || !std::isfinite(pt.dp_de))
          throw std::runtime_error("non-finite surface value for group " + group_label(g));
        const std::size_t k = i * u_.size() + j;
        t.f[k] = pt.p;
        t.fb[k] = pt.dp_db;
        t.fu[k] = pt.dp_de * e;
        t.fbu[k] = (up.dp_de - dn.dp_de) * e / (2 * hb);
      }
    }
    tables_[g] = std::move(t);
  }
}

SurfacePoint CachedSurface::eval(double b, double e, GroupId g) const {
  auto it = tables_.find(g);
  if (it == tables_.end()) throw std::out_of_range("group " + group_label(g) + " not cached");
  const Table& t = it->second;
  const double bc = std::clamp(b, b_.front(), b_.back());
  const double u = std::clamp(std::log(std::max(e, 1e-300)), u_.front(), u_.back());
  auto cell = [](const std::vector<double>& grid, double v) {
    const std::size_t i = std::upper_bound(grid.begin(), grid.end(), v) - grid.begin();
    return std::min(std::max<std::size_t>(i, 1), grid.size() - 1) - 1;
  };
  const std::size_t i = cell(b_, bc), j = cell(u_, u);
  const double hb = b_[i + 1] - b_[i], hu = u_[j + 1] - u_[j];
  const double x = (bc - b_[i]) / hb, y = (u - u_[j]) / hu;
  // Hermite basis and derivatives: h00, h01 (value), h10, h11 (slope)
  auto basis = [](double s, double out[4], double d[4]) {
    const double s2 = s * s, s3 = s2 * s;
    out[0] = 2 * s3 - 3 * s2 + 1;
    out[1] = -2 * s3 + 3 * s2;
    out[2] = s3 - 2 * s2 + s;
    out[3] = s3 - s2;
    d[0] = 6 * s2 - 6 * s;
    d[1] = -6 * s2 + 6 * s;
    d[2] = 3 * s2 - 4 * s + 1;
    d[3] = 3 * s2 - 2 * s;
  };
  double bx[4], dbx[4], by[4], dby[4];
  basis(x, bx, dbx);
  basis(y, by, dby);
  double v = 0, vx = 0, vy = 0;
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 2; ++c) {
      const std::size_t k = (i + a) * u_.size() + (j + c);
      const double coef[4] = {t.f[k], hb * t.fb[k], hu * t.fu[k], hb * hu * t.fbu[k]};
      const double wx[2] = {bx[a], bx[2 + a]}, dwx[2] = {dbx[a], dbx[2 + a]};
      const double wy[2] = {by[c], by[2 + c]}, dwy[2] = {dby[c], dby[2 + c]};
      v += coef[0] * wx[0] * wy[0] + coef[1] * wx[1] * wy[0] + coef[2] * wx[0] * wy[1] +
           coef[3] * wx[1] * wy[1];
      vx += coef[0] * dwx[0] * wy[0] + coef[1] * dwx[1] * wy[0] + coef[2] * dwx[0] * wy[1] +
            coef[3] * dwx[1] * wy[1];
      vy += coef[0] * wx[0] * dwy[0] + coef[1] * wx[1] * dwy[0] + coef[2] * wx[0] * dwy[1] +
            coef[3] * wx[1] * dwy[1];
    }
  }
  return {v, vx / hb, vy / hu / std::exp(u)};
}

}  // namespace lmsig
