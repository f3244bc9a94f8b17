#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/random.h"
#include "lmsig/supply.h"
#include "oracles.h"

using namespace lmsig;

namespace {

const GroupId kG = group_id({CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kLow});
const GroupId kH = group_id({CountryGroup::kEurope, ArrivalGroup::kArrOver45, ReputationGroup::kHigh});

// Workers with efficiency multipliers eta: true log effort is log t + eta and the
// signal responds to true effort.
struct Synthetic {
  std::vector<EffortObservation> obs;
  std::vector<double> true_log_e;
};

Synthetic synthetic_workers(int n_workers, int per_worker, double v_eta, double k, double gamma,
                            double v_eps, Rng& rng) {
  Synthetic out;
  for (int w = 0; w < n_workers; ++w) {
    const double eta = std::sqrt(v_eta) * rng.normal();
    for (int i = 0; i < per_worker; ++i) {
      const double log_t = rng.normal(0.5, 0.8);
      const double log_e = log_t + eta;
      out.obs.push_back({"w" + std::to_string(w), kG,
                         k + gamma * log_e + std::sqrt(v_eps) * rng.normal(), std::exp(log_t)});
      out.true_log_e.push_back(log_e);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("supply") {

TEST_CASE("signal production: exact line, with and without worker effects") {
  std::vector<EffortObservation> obs;
  for (int w = 0; w < 6; ++w)
    for (int i = 0; i < 4; ++i) {
      const double t = 0.5 + 0.7 * i + 0.3 * w;
      obs.push_back({"w" + std::to_string(w), kG, 4.2 + 1.3 * std::log(t), t});
      obs.push_back({"v" + std::to_string(w * 4 + i), kH, -1.0 + 0.8 * std::log(t), t});
    }
  const auto fit = estimate_signal_production(obs);
  CHECK(fit.fixed_effects.at(kG));
  CHECK_FALSE(fit.fixed_effects.at(kH));
  CHECK(std::abs(fit.production.at(kG).gamma - 1.3) < 1e-10);
  CHECK(std::abs(fit.production.at(kG).k - 4.2) < 1e-10);
  CHECK(std::abs(fit.production.at(kH).gamma - 0.8) < 1e-10);
  CHECK(std::abs(fit.production.at(kH).k + 1.0) < 1e-10);
  CHECK(fit.production.at(kG).noise_var < 1e-20);
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-10);
  REQUIRE(fit.diagnostics.size() == 1);
  CHECK(fit.diagnostics[0].find("pooled") != std::string::npos);
}

TEST_CASE("signal production: recovery within two standard errors") {
  Rng rng(31);
  std::vector<EffortObservation> obs;
  double sxx = 0, mean = 0;
  std::vector<double> lx;
  for (int i = 0; i < 5000; ++i) {
    const double log_t = rng.normal(0.6, 0.9);
    obs.push_back({"w" + std::to_string(i / 5), kG, 5.12 + 1.26 * log_t + std::sqrt(2.1) * rng.normal(), std::exp(log_t)});
    lx.push_back(log_t);
  }
  const auto fit = estimate_signal_production(obs);
  // Within-worker variation of log t sets the slope's standard error.
  for (int w = 0; w < 1000; ++w) {
    mean = 0;
    for (int i = 0; i < 5; ++i) mean += lx[w * 5 + i] / 5;
    for (int i = 0; i < 5; ++i) sxx += (lx[w * 5 + i] - mean) * (lx[w * 5 + i] - mean);
  }
  const auto& sp = fit.production.at(kG);
  CHECK(std::abs(sp.gamma - 1.26) <= 2 * std::sqrt(2.1 / sxx));
  CHECK(std::abs(sp.noise_var - 2.1) <= 2 * 2.1 * std::sqrt(2.0 / 4000));
  CHECK(std::abs(sp.k - 5.12) <= 2 * std::sqrt(2.1 / 5000 + 0.81 * 2.1 / sxx));
}

TEST_CASE("signal production: time units only move the intercept") {
  Rng rng(4);
  auto obs = synthetic_workers(40, 5, 0.1, 3.0, 1.1, 1.0, rng).obs;
  const auto a = estimate_signal_production(obs);
  for (auto& o : obs) o.minutes *= 60;
  const auto b = estimate_signal_production(obs);
  CHECK(b.production.at(kG).gamma == doctest::Approx(a.production.at(kG).gamma).epsilon(1e-12));
  CHECK(b.production.at(kG).noise_var == doctest::Approx(a.production.at(kG).noise_var).epsilon(1e-10));
  CHECK(b.production.at(kG).k ==
        doctest::Approx(a.production.at(kG).k - a.production.at(kG).gamma * std::log(60.0)).epsilon(1e-12));
  obs[3].minutes = 0;
  CHECK_THROWS_AS(estimate_signal_production(obs), std::invalid_argument);
}

TEST_CASE("effort correction: no heterogeneity leaves times alone") {
  std::vector<EffortObservation> obs;
  SignalProductionFit fit;
  fit.production[kG] = {0.0, 1.0, 1.0};
  for (int w = 0; w < 5; ++w)
    for (int i = 0; i < 3; ++i) {
      obs.push_back({"w" + std::to_string(w), kG, 0.0, 1.0 + i + w});
      fit.residuals.push_back(i - 1.0);  // every worker's mean residual is zero
    }
  const auto c = correct_effort(obs, fit);
  CHECK(c.v_eta == 0.0);
  for (std::size_t i = 0; i < obs.size(); ++i) CHECK(c.corrected_minutes[i] == obs[i].minutes);
}

TEST_CASE("effort correction: shrinkage limit and the cap") {
  Rng rng(8);
  std::vector<EffortObservation> obs;
  SignalProductionFit fit;
  fit.production[kG] = {0.0, 1.0, 1.0};
  auto add = [&](const std::string& id, double r) {
    obs.push_back({id, kG, 0.0, 2.0});
    fit.residuals.push_back(r);
  };
  for (int w = 0; w < 200; ++w) {
    const double eta = 0.5 * rng.normal();
    for (int i = 0; i < 4; ++i) add("w" + std::to_string(w), eta + rng.normal());
  }
  for (int i = 0; i < 200000; ++i) add("big", i % 2 ? 0.5 : 1.5);  // mean 1.0, huge precision
  for (int i = 0; i < 200000; ++i) add("far", i % 2 ? 1.5 : 2.5);  // mean 2.0
  add("single", 0.8);
  const auto c = correct_effort(obs, fit);
  CHECK(c.v_eta > 0.1);
  const auto& big = c.workers.at("big");
  CHECK(big.raw_mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(big.shift - 1.0) < 1e-4);
  CHECK(c.workers.at("far").shift == 1.25);
  CHECK(c.corrected_minutes.back() ==
        doctest::Approx(2.0 * std::exp(c.workers.at("single").shift)).epsilon(1e-14));
  const auto& one = c.workers.at("single");
  CHECK(one.n_obs == 1);
  CHECK(one.shift == doctest::Approx(c.v_eta / (1 + c.v_eta) * 0.8).epsilon(1e-12));
  for (const auto& [id, wk] : c.workers) {
    const double f = c.v_eta * wk.precision / (1 + c.v_eta * wk.precision);
    CHECK(f >= 0);
    CHECK(f < 1);
    CHECK(std::abs(wk.shift) <= 1.25);
  }
}

TEST_CASE("effort correction: closer to true effort and order preserving") {
  Rng rng(12);
  const auto syn = synthetic_workers(300, 10, 0.25, 4.0, 1.2, 1.5, rng);
  const auto fit = estimate_signal_production(syn.obs);
  const auto c = correct_effort(syn.obs, fit);
  double raw = 0, corr = 0;
  for (std::size_t i = 0; i < syn.obs.size(); ++i) {
    raw += std::pow(std::log(syn.obs[i].minutes) - syn.true_log_e[i], 2);
    corr += std::pow(std::log(c.corrected_minutes[i]) - syn.true_log_e[i], 2);
  }
  CHECK(corr < raw);
  CHECK(c.v_eta == doctest::Approx(0.25).epsilon(0.3));
  for (std::size_t i = 1; i < syn.obs.size(); ++i) {
    if (syn.obs[i].worker_id != syn.obs[i - 1].worker_id) continue;
    CHECK((syn.obs[i].minutes < syn.obs[i - 1].minutes) ==
          (c.corrected_minutes[i] < c.corrected_minutes[i - 1]));
  }
  SignalProductionFit short_fit = fit;
  short_fit.residuals.pop_back();
  CHECK_THROWS_AS(correct_effort(syn.obs, short_fit), std::invalid_argument);
}

TEST_CASE("inversion: worked example") {
  const auto t = invert_foc({0.5, -0.01, 0.1}, 100.0, 1.0);
  REQUIRE(t.ok());
  CHECK(*t.cost == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(std::exp(-*t.ability) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(*t.ability == doctest::Approx(-1.6094379124341003).epsilon(1e-14));
}

TEST_CASE("inversion: precondition failures are rejects") {
  CHECK(invert_foc({0.0, -0.01, 0.1}, 100, 1).reject_reason == "zero_win_probability");
  CHECK(invert_foc({0.5, 0.0, 0.1}, 100, 1).reject_reason == "bid_derivative_not_negative");
  CHECK(invert_foc({0.5, -0.01, 0.0}, 100, 1).reject_reason == "effort_derivative_not_positive");
  CHECK(invert_foc({0.5, -0.01, 0.1}, 100, 0).reject_reason == "nonpositive_effort");
  CHECK(invert_foc({NAN, -0.01, 0.1}, 100, 1).reject_reason == "nonfinite_surface");
  CHECK_FALSE(invert_foc({0.5, 0.01, 0.1}, 100, 1).ok());
  oracle::ZeroSurface zero;
  const auto v = invert_focs(zero, {{kG, 100, 1}, {kG, 80, -1}});
  CHECK(v[0].reject_reason == "zero_win_probability");
  CHECK(v[1].reject_reason == "nonpositive_effort");
}

TEST_CASE("inversion: markups are positive") {
  const oracle::LogitSurface s(0.55, 1.5, 0.7, -0.02, 2.0);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double b = rng.uniform(30, 250), e = std::exp(rng.uniform(-2.7, 2.4));
    const auto t = invert_foc(s.eval(b, e, kG), b, e);
    REQUIRE(t.ok());
    CHECK(*t.cost < b);
  }
}

TEST_CASE("inversion: grid-optimal actions map back to their types") {
  const oracle::LogitSurface s(0.6, 2.5, 0.6, -0.03, 1.0);
  Rng rng(19);
  int tried = 0, recovered = 0;
  while (tried < 100) {
    const double c = rng.uniform(20, 140), a = rng.uniform(-1.5, 2.5);
    const auto [b, e] = oracle::grid_argmax(s, kG, c, a);
    // Corner actions do not satisfy the first-order conditions.
    if (b <= kMinBid + 1 || b >= kMaxBid - 1 || e <= kEffortFloor * 1.05 || e >= kMaxEffort * 0.95)
      continue;
    ++tried;
    const auto t = invert_focs(s, {{kG, b, e}})[0];
    REQUIRE(t.ok());
    if (std::abs(*t.cost - c) <= 0.5 && std::abs(*t.ability - a) <= 0.05) ++recovered;
  }
  CHECK(recovered == 100);
}

}  // TEST_SUITE
