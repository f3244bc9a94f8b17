#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmsig/groups.h"
#include "lmsig/optimizer.h"

namespace lmsig {

// One considered application as seen by the employer.
struct ChoiceSlot {
  GroupId group;
  double bid = 0.0;
  double signal = 0.0;
  std::optional<double> belief;  // expected ability given the signal, structural stage only
};

struct ChoiceJob {
  std::string job_id;
  std::vector<ChoiceSlot> considered;
  int winner = -1;  // index into considered, -1 for the outside option
};

// Builds a ChoiceJob from all applications of a post. Throws std::invalid_argument
// when a winner was not considered or there is more than one winner.
ChoiceJob make_choice_job(std::string job_id, const std::vector<ChoiceSlot>& applications,
                          const std::vector<bool>& considered, const std::vector<bool>& won);

// Choice probabilities under the abandonment mixture; element 0 is the outside
// option, element j + 1 is considered slot j.
std::vector<double> choice_probabilities(const std::vector<double>& deltas, double pi);

struct ReducedFormParams {
  double alpha_signed = -0.01;
  GroupMap<double> k_lambda;
  GroupMap<double> gamma_lambda;
  double pi = 0.5;

  double index(const ChoiceSlot& s) const;  // K(x) + gamma(x) s + alpha b
  double lambda(double signal, GroupId g) const;
};

struct StructuralParams {
  double alpha_signed = -0.01;
  double beta = 0.0;
  GroupMap<double> t_by_group;
  double pi = 0.5;

  double index(const ChoiceSlot& s) const;  // T(x) + beta * belief + alpha b
  double t(GroupId g) const;
};

struct FitReport {
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  double grad_sup_norm = 0.0;
  std::string message;
  std::vector<std::string> names;      // natural-scale parameter names
  std::vector<double> estimates;
  std::vector<double> standard_errors;  // from the inverse of the negative Hessian
};

struct ReducedFormFit {
  ReducedFormParams params;
  FitReport report;
};

struct StructuralFit {
  StructuralParams params;
  FitReport report;
};

// Gradient with respect to the natural parameters, in the order used by the fits:
// alpha, then K per group, gamma per group, pi (reduced) or alpha, beta, T per group, pi.
double reduced_form_loglik(const ReducedFormParams& p, const std::vector<ChoiceJob>& jobs,
                           Eigen::VectorXd* grad = nullptr);
double structural_loglik(const StructuralParams& p, const std::vector<ChoiceJob>& jobs,
                         Eigen::VectorXd* grad = nullptr);

// Groups appearing among considered slots, sorted; defines the parameter layout.
std::vector<GroupId> groups_in(const std::vector<ChoiceJob>& jobs);

struct DemandFitOptions {
  double grad_tol = 1e-6;
  int max_iter = 500;
};

// Starting values default to alpha_signed = -0.01, zero intercepts and slopes,
// and pi at one minus the empirical outside-option share.
ReducedFormFit fit_reduced_form(const std::vector<ChoiceJob>& jobs,
                                std::optional<ReducedFormParams> init = std::nullopt,
                                const DemandFitOptions& opts = {});
StructuralFit fit_structural(const std::vector<ChoiceJob>& jobs,
                             std::optional<StructuralParams> init = std::nullopt,
                             const DemandFitOptions& opts = {});

// Dollar willingness to pay for one standard deviation of a variable.
double wtp_per_sd(double coef, double alpha_signed, double sd);

}  // namespace lmsig
