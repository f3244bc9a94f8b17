#include <cmath>
#include <vector>

#include <doctest.h>

#include "lmsig/demand.h"
#include "lmsig/reference_values.h"
#include "lmsig/simulator.h"
#include "lmsig/stats.h"
#include "oracles.h"

using namespace lmsig;

namespace {

const GroupId kG = group_id({CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr5to45, ReputationGroup::kRookie});

oracle::LogitSurface test_surface() { return {0.6, 2.5, 0.6, -0.03, 1.0}; }

ModelParams table_params() {
  ModelParams p;
  p.alpha = reference::kPriceCoefficient;
  p.beta = reference::kAbilityCoefficient;
  p.pi = reference::kNotAbandonProbability;
  p.t_by_group[kG] = 1.0;
  p.signal[kG] = reference::signal_production(group_from_id(kG));
  return p;
}

ArrivalDistribution five_per_job() {
  ArrivalDistribution a;
  a.compositions = {{{kG, 5}}, {{kG, 12}}};
  a.weights = {0.5, 0.5};
  return a;
}

TypeDistribution small_types() {
  TypeDistribution t;
  t.groups[kG] = {Marginal::normal(40, 30, -40, 140), Marginal::normal(0, 1, -3, 3), 0.2};
  return t;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("choice probabilities") {
  const auto empty = choice_probabilities({}, 0.57);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0] == 1.0);
  const auto one = choice_probabilities({0.0}, 0.5748);
  CHECK(one[1] == doctest::Approx(0.2874).epsilon(1e-12));
  CHECK(one[0] == doctest::Approx(1 - 0.2874).epsilon(1e-12));
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> d(rng.index(40));
    for (auto& x : d) x = rng.normal(0, 5);
    const auto p = choice_probabilities(d, rng.uniform(0.01, 1.0));
    double s = 0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("choose_winner") {
  Rng rng(11);
  CHECK(choose_winner({}, 0.8, rng) == -1);
  int wins = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) wins += choose_winner({0.0}, 1.0, rng) == 0;
  CHECK(std::abs(double(wins) / n - 0.5) < 0.005);

  // Frequencies within 3 SE of the analytic probabilities.
  const std::vector<double> d = {0.4, -0.3, 1.1};
  const double pi = 0.5749;
  const auto p = choice_probabilities(d, pi);
  std::vector<int> counts(4, 0);
  const int m = 1000000;
  for (int i = 0; i < m; ++i) counts[choose_winner(d, pi, rng) + 1]++;
  for (int k = 0; k < 4; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / m);
    CHECK(std::abs(double(counts[k]) / m - p[k]) < 3 * se);
  }
}

TEST_CASE("pi = 0 abandons every job") {
  ModelParams p = table_params();
  p.pi = 0.0;
  StrategyProfile s;
  s.groups[kG] = {{0.0}, {0.0}, {100.0}, {1.0}};
  ConsiderationRates q;
  const auto jobs = simulate_market(300, five_per_job(), small_types(), s, p, q, true_ability_view(), 3);
  for (const auto& j : jobs) {
    CHECK(j.abandoned);
    CHECK(j.winner == -1);
  }
}

TEST_CASE("empty compositions give outside-only jobs") {
  ArrivalDistribution a;
  a.compositions = {{}};
  a.weights = {1.0};
  StrategyProfile s;
  s.groups[kG] = {{0.0}, {0.0}, {100.0}, {1.0}};
  const auto jobs = simulate_market(50, a, small_types(), s, table_params(), {}, true_ability_view(), 1);
  for (const auto& j : jobs) {
    CHECK(j.applications.empty());
    CHECK(j.winner == -1);
    CHECK(j.outside_probability == 1.0);
  }
}

TEST_CASE("zero surface gives the corner action") {
  const oracle::ZeroSurface zero;
  const auto br = best_response(zero, kG, 40.0, 0.5);
  CHECK(br.bid == kMaxBid);
  CHECK(br.effort == kEffortFloor);
}

TEST_CASE("best response matches a brute-force grid on the analytic logit surface") {
  const auto s = test_surface();
  const double db = (kMaxBid - kMinBid) / 200;
  const double du = (std::log(kMaxEffort) - std::log(kEffortFloor)) / 200;
  for (double c : {-20.0, 10.0, 50.0, 90.0, 140.0}) {
    for (double a : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
      const auto br = best_response(s, kG, c, a);
      const auto [gb, ge] = oracle::grid_argmax(s, kG, c, a, 201, 1);
      CHECK(std::abs(br.bid - gb) <= db);
      CHECK(std::abs(std::log(br.effort) - std::log(ge)) <= du);
      CHECK(br.payoff >= oracle::payoff(s, kG, gb, ge, c, a) - 1e-12);
    }
  }
}

TEST_CASE("optimal effort rises with ability") {
  const auto s = test_surface();
  for (double c : {0.0, 60.0}) {
    double prev = 0;
    for (double a = -2.0; a <= 3.0; a += 0.25) {
      const double e = best_response(s, kG, c, a).effort;
      CHECK(e >= prev);
      prev = e;
    }
  }
}

TEST_CASE("calibrated market: identities, hire rate and informative signals") {
  const auto s = test_surface();
  const auto types = small_types();
  const auto strategy = calibrate_strategy_from_focs(types, s, {kG}, 9);
  const auto& gs = strategy.groups.at(kG);
  for (double b : gs.bid) {
    CHECK(b >= kMinBid);
    CHECK(b <= kMaxBid);
  }
  const ModelParams p = table_params();
  ConsiderationRates q;
  q.rate[kG] = 0.6;
  const auto jobs = simulate_market(4000, five_per_job(), types, strategy, p, q, true_ability_view(), 17);
  int hires = 0;
  std::vector<double> sig, ab;
  for (const auto& j : jobs) {
    CHECK(j.probability_sum_error <= 1e-12);
    if (j.winner >= 0) {
      ++hires;
      CHECK(j.applications[j.winner].considered);
      CHECK_FALSE(j.abandoned);
    }
    int won = 0;
    for (const auto& a : j.applications) {
      won += a.won;
      sig.push_back(a.signal);
      ab.push_back(a.ability);
    }
    CHECK(won <= 1);
  }
  const double rate = double(hires) / jobs.size();
  CHECK(rate > 0.0);
  CHECK(rate < p.pi);
  CHECK(correlation(sig, ab) > 0.0);
}

TEST_CASE("simulation is a function of the seed") {
  const auto strategy = calibrate_strategy_from_focs(small_types(), test_surface(), {kG}, 5);
  const auto a = simulate_market(200, five_per_job(), small_types(), strategy, table_params(), {},
                                 true_ability_view(), 5);
  const auto b = simulate_market(200, five_per_job(), small_types(), strategy, table_params(), {},
                                 true_ability_view(), 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(a[m].winner == b[m].winner);
    REQUIRE(a[m].applications.size() == b[m].applications.size());
    for (std::size_t k = 0; k < a[m].applications.size(); ++k)
      CHECK(a[m].applications[k].signal == b[m].applications[k].signal);
  }
}

TEST_CASE("type distribution and marginals") {
  const auto t = small_types();
  Rng rng(4);
  std::vector<double> c, a;
  for (int i = 0; i < 50000; ++i) {
    auto [x, y] = t.sample(kG, rng);
    CHECK(x >= -40.0);
    CHECK(x <= 140.0);
    c.push_back(x);
    a.push_back(y);
  }
  CHECK(correlation(c, a) == doctest::Approx(0.2).epsilon(0.15));
  const auto emp = Marginal::empirical({3.0, 1.0, 2.0});
  CHECK(emp.quantile(0.1) == 1.0);
  CHECK(emp.quantile(0.5) == 2.0);
  CHECK(emp.quantile(0.99) == 3.0);
  CHECK_THROWS_AS(Marginal::normal(0, 0, -1, 1), std::invalid_argument);
  ArrivalDistribution bad;
  bad.compositions = {{{kG, 1}}};
  bad.weights = {0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

}  // TEST_SUITE
