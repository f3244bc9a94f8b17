#include "lmsig/optimizer.h"

#include <cmath>
#include <limits>

namespace lmsig {

Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd gp(n), gm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    f(xp, &gp);
    f(xm, &gm);
    h.col(i) = (gp - gm) / (2 * step);
  }
  return 0.5 * (h + h.transpose());
}

namespace {

// Inverse of -H if H is negative definite, else a scaled identity.
Eigen::MatrixXd initial_inverse(const Objective& f, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& g, bool hessian_start) {
  const Eigen::Index n = x.size();
  if (hessian_start) {
    Eigen::MatrixXd neg = -fd_hessian(f, x);
    Eigen::LLT<Eigen::MatrixXd> llt(neg);
    if (llt.info() == Eigen::Success) return llt.solve(Eigen::MatrixXd::Identity(n, n));
  }
  const double scale = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  return scale * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

OptimResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  OptimResult r;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0), g(n);
  double fx = f(x, &g);
  ++r.evaluations;
  if (!std::isfinite(fx)) {
    r.x = x;
    r.value = fx;
    r.gradient = g;
    r.message = "objective not finite at the starting point";
    return r;
  }
  Eigen::MatrixXd hinv = initial_inverse(f, x, g, opts.hessian_start);
  int restarts = 0;
  int stalls = 0;

  for (r.iterations = 0; r.iterations < opts.max_iter; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    Eigen::VectorXd dir = hinv * g;
    double slope = g.dot(dir);
    if (!(slope > 0)) {
      hinv = initial_inverse(f, x, g, false);
      dir = hinv * g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    Eigen::VectorXd xn(n), gn(n);
    double fn = -INFINITY;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      xn = x + step * dir;
      fn = f(xn, &gn);
      ++r.evaluations;
      if (std::isfinite(fn) && fn >= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Rebuild curvature once before giving up.
      if (restarts++ < 3) {
        hinv = initial_inverse(f, x, g, opts.hessian_start);
        continue;
      }
      r.message = "line search failed";
      break;
    }
    // Steps that no longer move f above rounding noise: refresh the curvature and
    // stop once the Newton decrement says nothing measurable is left to gain.
    const double noise = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx));
    if (fn - fx <= noise) {
      if (++stalls >= 3) {
        hinv = initial_inverse(f, x, g, true);
        const double decrement = g.dot(hinv * g);
        if (decrement >= 0 && decrement <= noise) {
          r.converged = true;
          r.message = "newton decrement below rounding";
          break;
        }
        stalls = 0;
      }
    } else {
      stalls = 0;
    }
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = g - gn;  // gradient of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  if (!r.converged && r.message.empty()) r.message = "iteration limit reached";
  r.x = x;
  r.value = fx;
  r.gradient = g;
  return r;
}

}  // namespace lmsig
