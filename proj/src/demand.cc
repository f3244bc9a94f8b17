#include "lmsig/demand.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lmsig {

ChoiceJob make_choice_job(std::string job_id, const std::vector<ChoiceSlot>& applications,
                          const std::vector<bool>& considered, const std::vector<bool>& won) {
  if (applications.size() != considered.size() || applications.size() != won.size())
    throw std::invalid_argument("job " + job_id + ": flag arrays do not match applications");
  ChoiceJob job;
  job.job_id = std::move(job_id);
  for (std::size_t i = 0; i < applications.size(); ++i) {
    if (won[i] && !considered[i])
      throw std::invalid_argument("job " + job.job_id + ": winner not in the consideration set");
    if (!considered[i]) continue;
    if (won[i]) {
      if (job.winner >= 0) throw std::invalid_argument("job " + job.job_id + ": several winners");
      job.winner = static_cast<int>(job.considered.size());
    }
    job.considered.push_back(applications[i]);
  }
  return job;
}

std::vector<double> choice_probabilities(const std::vector<double>& deltas, double pi) {
  std::vector<double> p(deltas.size() + 1);
  double m = 0.0;
  for (double d : deltas) m = std::max(m, d);
  double denom = std::exp(-m);
  for (double d : deltas) denom += std::exp(d - m);
  for (std::size_t j = 0; j < deltas.size(); ++j) p[j + 1] = pi * std::exp(deltas[j] - m) / denom;
  p[0] = pi * std::exp(-m) / denom + (1.0 - pi);
  return p;
}

double ReducedFormParams::lambda(double signal, GroupId g) const {
  auto k = k_lambda.find(g);
  auto s = gamma_lambda.find(g);
  if (k == k_lambda.end() || s == gamma_lambda.end())
    throw std::out_of_range("no reduced-form coefficients for group " + group_label(g));
  return k->second + s->second * signal;
}

double ReducedFormParams::index(const ChoiceSlot& s) const {
  return lambda(s.signal, s.group) + alpha_signed * s.bid;
}

double StructuralParams::t(GroupId g) const {
  auto it = t_by_group.find(g);
  if (it == t_by_group.end()) throw std::out_of_range("no T for group " + group_label(g));
  return it->second;
}

double StructuralParams::index(const ChoiceSlot& s) const {
  if (!s.belief) throw std::invalid_argument("missing belief for a considered application");
  return t(s.group) + beta * *s.belief + alpha_signed * s.bid;
}

namespace {

// Sparse derivative of one slot's index with respect to the linear parameters.
struct IndexTerm {
  double delta = 0.0;
  int n = 0;
  std::array<std::pair<int, double>, 3> d{};
};

// Log-likelihood of the abandonment mixture over linear-index logit jobs. The
// last gradient entry is with respect to pi.
template <typename IndexFn>
double mixture_loglik(const std::vector<ChoiceJob>& jobs, double pi, int n_params,
                      IndexFn index_of, Eigen::VectorXd* grad) {
  if (!(pi > 0.0 && pi <= 1.0)) throw std::domain_error("pi must lie in (0, 1]");
  if (grad) grad->setZero(n_params);
  const double log_pi = std::log(pi);
  double ll = 0.0;
  std::vector<IndexTerm> terms;
  for (const auto& job : jobs) {
    if (job.winner >= static_cast<int>(job.considered.size()))
      throw std::invalid_argument("job " + job.job_id + ": winner index out of range");
    terms.resize(job.considered.size());
    double m = 0.0;
    for (std::size_t j = 0; j < job.considered.size(); ++j) {
      terms[j] = index_of(job.considered[j]);
      m = std::max(m, terms[j].delta);
    }
    // e^{-m} (1 + S) and e^{-m} (1 + (1 - pi) S)
    double sum = 0.0;
    for (const auto& t : terms) sum += std::exp(t.delta - m);
    const double base = std::exp(-m);
    const double one_plus_s = base + sum;
    const double one_plus_qs = base + (1.0 - pi) * sum;
    if (job.winner >= 0) {
      ll += terms[job.winner].delta - m - std::log(one_plus_s) + log_pi;
    } else {
      ll += std::log(one_plus_qs) - std::log(one_plus_s);
    }
    if (!grad) continue;
    auto& g = *grad;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double w = std::exp(terms[j].delta - m);
      double dd = -w / one_plus_s;
      if (job.winner < 0) dd += (1.0 - pi) * w / one_plus_qs;
      else if (static_cast<int>(j) == job.winner) dd += 1.0;
      for (int k = 0; k < terms[j].n; ++k) g[terms[j].d[k].first] += dd * terms[j].d[k].second;
    }
    g[n_params - 1] += job.winner >= 0 ? 1.0 / pi : -sum / one_plus_qs;
  }
  return ll;
}

template <typename Map>
std::map<GroupId, int> layout(const Map& m, int offset) {
  std::map<GroupId, int> pos;
  for (const auto& [g, v] : m) pos[g] = offset++;
  return pos;
}

int position(const std::map<GroupId, int>& pos, GroupId g) {
  auto it = pos.find(g);
  if (it == pos.end()) throw std::out_of_range("no coefficient for group " + group_label(g));
  return it->second;
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double outside_share(const std::vector<ChoiceJob>& jobs) {
  if (jobs.empty()) return 0.5;
  double n = 0;
  for (const auto& j : jobs) n += j.winner < 0;
  return n / double(jobs.size());
}

void check_identified(const std::vector<ChoiceJob>& jobs) {
  bool inside = false, outside = false;
  for (const auto& j : jobs) (j.winner >= 0 ? inside : outside) = true;
  if (!inside || !outside)
    throw std::invalid_argument("need both inside wins and outside outcomes to identify pi");
}

// Maximizes in internal coordinates z = x / scale (pi on the logit scale), then
// fills the report on the natural scale with delta-method standard errors.
template <typename Unpack>
FitReport run_fit(const Objective& natural_obj, Eigen::VectorXd x0, const Eigen::VectorXd& scale,
                  std::vector<std::string> names, const DemandFitOptions& opts, Unpack unpack) {
  const Eigen::Index n = x0.size();
  // internal z: z_i = x_i / scale_i, except the last which is logit(pi)
  auto to_natural = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd x = z.cwiseProduct(scale);
    x[n - 1] = inv_logit(z[n - 1]);
    return x;
  };
  Objective internal = [&](const Eigen::VectorXd& z, Eigen::VectorXd* gz) -> double {
    Eigen::VectorXd x = to_natural(z);
    if (!(x[n - 1] > 0.0 && x[n - 1] < 1.0)) return -INFINITY;
    Eigen::VectorXd gx;
    const double v = natural_obj(x, gz ? &gx : nullptr);
    if (gz) {
      *gz = gx.cwiseProduct(scale);
      (*gz)[n - 1] = gx[n - 1] * x[n - 1] * (1.0 - x[n - 1]);
    }
    return v;
  };
  Eigen::VectorXd z0 = x0.cwiseQuotient(scale);
  z0[n - 1] = logit(x0[n - 1]);
  BfgsOptions bo;
  bo.grad_tol = opts.grad_tol;
  bo.max_iter = opts.max_iter;
  const OptimResult r = maximize_bfgs(internal, z0, bo);

  FitReport rep;
  rep.converged = r.converged;
  rep.iterations = r.iterations;
  rep.loglik = r.value;
  rep.grad_sup_norm = r.gradient.lpNorm<Eigen::Infinity>();
  rep.message = r.message;
  rep.names = std::move(names);
  const Eigen::VectorXd x = to_natural(r.x);
  unpack(x);
  rep.estimates.assign(x.data(), x.data() + n);

  const Eigen::MatrixXd h = fd_hessian(internal, r.x);
  Eigen::VectorXd jac = scale;
  jac[n - 1] = x[n - 1] * (1.0 - x[n - 1]);
  rep.standard_errors.assign(n, NAN);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(-h);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov_z = lu.inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = cov_z(i, i) * jac[i] * jac[i];
      rep.standard_errors[i] = v >= 0 ? std::sqrt(v) : NAN;
    }
  }
  return rep;
}

}  // namespace

std::vector<GroupId> groups_in(const std::vector<ChoiceJob>& jobs) {
  std::set<GroupId> s;
  for (const auto& j : jobs)
    for (const auto& c : j.considered) s.insert(c.group);
  return {s.begin(), s.end()};
}

double reduced_form_loglik(const ReducedFormParams& p, const std::vector<ChoiceJob>& jobs,
                           Eigen::VectorXd* grad) {
  const auto kpos = layout(p.k_lambda, 1);
  const auto gpos = layout(p.gamma_lambda, 1 + static_cast<int>(p.k_lambda.size()));
  const int n = 2 + static_cast<int>(p.k_lambda.size() + p.gamma_lambda.size());
  auto index_of = [&](const ChoiceSlot& s) {
    IndexTerm t;
    const int ki = position(kpos, s.group), gi = position(gpos, s.group);
    t.delta = p.k_lambda.at(s.group) + p.gamma_lambda.at(s.group) * s.signal + p.alpha_signed * s.bid;
    t.n = 3;
    t.d = {{{0, s.bid}, {ki, 1.0}, {gi, s.signal}}};
    return t;
  };
  return mixture_loglik(jobs, p.pi, n, index_of, grad);
}

double structural_loglik(const StructuralParams& p, const std::vector<ChoiceJob>& jobs,
                         Eigen::VectorXd* grad) {
  const auto tpos = layout(p.t_by_group, 2);
  const int n = 3 + static_cast<int>(p.t_by_group.size());
  auto index_of = [&](const ChoiceSlot& s) {
    if (!s.belief) throw std::invalid_argument("missing belief for a considered application");
    IndexTerm t;
    const int ti = position(tpos, s.group);
    t.delta = p.t_by_group.at(s.group) + p.beta * *s.belief + p.alpha_signed * s.bid;
    t.n = 3;
    t.d = {{{0, s.bid}, {1, *s.belief}, {ti, 1.0}}};
    return t;
  };
  return mixture_loglik(jobs, p.pi, n, index_of, grad);
}

ReducedFormFit fit_reduced_form(const std::vector<ChoiceJob>& jobs,
                                std::optional<ReducedFormParams> init,
                                const DemandFitOptions& opts) {
  check_identified(jobs);
  const auto groups = groups_in(jobs);
  ReducedFormParams p;
  if (init) p = *init;
  else p.pi = std::clamp(1.0 - outside_share(jobs), 0.05, 0.95);
  for (GroupId g : groups) {
    p.k_lambda.try_emplace(g, 0.0);
    p.gamma_lambda.try_emplace(g, 0.0);
  }
  const int ng = static_cast<int>(p.k_lambda.size());
  const int n = 2 + 2 * ng;

  auto unpack = [&](const Eigen::VectorXd& x, ReducedFormParams& q) {
    q.alpha_signed = x[0];
    int i = 1;
    for (auto& [g, v] : q.k_lambda) v = x[i++];
    for (auto& [g, v] : q.gamma_lambda) v = x[i++];
    q.pi = x[n - 1];
  };
  Eigen::VectorXd x0(n), scale = Eigen::VectorXd::Ones(n);
  std::vector<std::string> names{"alpha_signed"};
  x0[0] = p.alpha_signed;
  scale[0] = 0.01;
  int i = 1;
  for (const auto& [g, v] : p.k_lambda) x0[i++] = v, names.push_back("k_lambda/" + group_label(g));
  for (const auto& [g, v] : p.gamma_lambda) {
    scale[i] = 0.1;
    x0[i++] = v;
    names.push_back("gamma_lambda/" + group_label(g));
  }
  x0[n - 1] = p.pi;
  names.push_back("pi");

  ReducedFormParams work = p;
  Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    unpack(x, work);
    return reduced_form_loglik(work, jobs, g);
  };
  ReducedFormFit fit;
  fit.report = run_fit(obj, x0, scale, names, opts,
                       [&](const Eigen::VectorXd& x) { unpack(x, p); });
  fit.params = p;
  return fit;
}

StructuralFit fit_structural(const std::vector<ChoiceJob>& jobs,
                             std::optional<StructuralParams> init, const DemandFitOptions& opts) {
  check_identified(jobs);
  const auto groups = groups_in(jobs);
  StructuralParams p;
  if (init) p = *init;
  else p.pi = std::clamp(1.0 - outside_share(jobs), 0.05, 0.95);
  for (GroupId g : groups) p.t_by_group.try_emplace(g, 0.0);
  const int n = 3 + static_cast<int>(p.t_by_group.size());

  auto unpack = [&](const Eigen::VectorXd& x, StructuralParams& q) {
    q.alpha_signed = x[0];
    q.beta = x[1];
    int i = 2;
    for (auto& [g, v] : q.t_by_group) v = x[i++];
    q.pi = x[n - 1];
  };
  Eigen::VectorXd x0(n), scale = Eigen::VectorXd::Ones(n);
  std::vector<std::string> names{"alpha_signed", "beta"};
  x0[0] = p.alpha_signed;
  scale[0] = 0.01;
  x0[1] = p.beta;
  scale[1] = 0.1;
  int i = 2;
  for (const auto& [g, v] : p.t_by_group) x0[i++] = v, names.push_back("t/" + group_label(g));
  x0[n - 1] = p.pi;
  names.push_back("pi");

  StructuralParams work = p;
  Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    unpack(x, work);
    return structural_loglik(work, jobs, g);
  };
  StructuralFit fit;
  fit.report = run_fit(obj, x0, scale, names, opts,
                       [&](const Eigen::VectorXd& x) { unpack(x, p); });
  fit.params = p;
  return fit;
}

double wtp_per_sd(double coef, double alpha_signed, double sd) {
  if (alpha_signed == 0.0) throw std::domain_error("wtp_per_sd: zero price coefficient");
  return sd * coef / std::abs(alpha_signed);
}

}  // namespace lmsig
