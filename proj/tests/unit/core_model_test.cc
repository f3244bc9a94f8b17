#include <cmath>
#include <vector>

#include <doctest.h>

#include "lmsig/demand.h"
#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/reference_values.h"
#include "lmsig/simulator.h"
#include "lmsig/stats.h"

using namespace lmsig;

namespace {

GroupId sa_over45_high() {
  return group_id({CountryGroup::kSouthAsia, ArrivalGroup::kArrOver45, ReputationGroup::kHigh});
}

ModelParams table_params() {
  ModelParams p;
  p.alpha = reference::kPriceCoefficient;
  p.beta = reference::kAbilityCoefficient;
  p.pi = reference::kNotAbandonProbability;
  for (const auto& row : reference::signal_production_table())
    p.signal[group_id(row.group)] = row.production;
  return p;
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("groups enumerate the 56 valid cells") {
  CHECK(all_groups().size() == kNumGroups);
  for (int i = 0; i < kNumGroups; ++i) {
    const GroupId id(i);
    CHECK(group_id(group_from_id(id)) == id);
    CHECK(parse_group_label(group_label(id)) == id);
  }
  CHECK_FALSE(is_valid({CountryGroup::kEurope, ArrivalGroup::kSpikeArrival, ReputationGroup::kLow}));
  CHECK_FALSE(is_valid({CountryGroup::kNotSouthAsiaSpike, ArrivalGroup::kArr0to5, ReputationGroup::kLow}));
  CHECK(is_valid({CountryGroup::kSouthAsia, ArrivalGroup::kSpikeArrival, ReputationGroup::kLow}));
  CHECK_THROWS_AS(group_id({CountryGroup::kOther, ArrivalGroup::kSpikeArrival, ReputationGroup::kHigh}),
                  std::invalid_argument);
}

TEST_CASE("effort cost examples") {
  CHECK(effort_cost(0.0, 1.7) == 0.0);
  CHECK(effort_cost(1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(effort_cost(2.0, std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(effort_cost(-0.1, 0.0), std::domain_error);
}

TEST_CASE("marginal effort cost examples") {
  CHECK(marginal_effort_cost(0.0, -2.0) == 0.0);
  CHECK(marginal_effort_cost(3.0, 0.0) == doctest::Approx(3.0));
  CHECK(marginal_effort_cost(1.0, std::log(5.0)) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS(marginal_effort_cost(-1.0, 0.0), std::domain_error);
}

TEST_CASE("effort cost shape by finite differences") {
  const double h = 1e-4;
  for (double e = 0.05; e <= 12.0; e += 0.35) {
    for (double a = -3.0; a <= 3.0; a += 0.5) {
      const double c = effort_cost(e, a);
      const double de = (effort_cost(e + h, a) - effort_cost(e - h, a)) / (2 * h);
      const double dee = (effort_cost(e + h, a) - 2 * c + effort_cost(e - h, a)) / (h * h);
      const double da = (effort_cost(e, a + h) - effort_cost(e, a - h)) / (2 * h);
      const double dea = (marginal_effort_cost(e, a + h) - marginal_effort_cost(e, a - h)) / (2 * h);
      CHECK(de > 0);
      CHECK(dee > 0);
      CHECK(da < 0);
      CHECK(dea < 0);
      CHECK(de == doctest::Approx(marginal_effort_cost(e, a)).epsilon(1e-6));
    }
  }
  CHECK(effort_cost(1e-8, 3.0) < 1e-15);
}

TEST_CASE("signal mean from the published table") {
  const ModelParams p = table_params();
  const GroupId g = sa_over45_high();
  CHECK(signal_mean(1.0, g, p) == doctest::Approx(6.3032).epsilon(1e-12));
  CHECK(p.signal_for(g).gamma == 1.0);
  CHECK(signal_mean(std::exp(1.0), g, p) == doctest::Approx(7.3032).epsilon(1e-12));
  CHECK_THROWS_AS(signal_mean(0.0, g, p), std::domain_error);
  for (const auto& row : reference::signal_production_table()) {
    const GroupId id = group_id(row.group);
    CHECK(signal_mean(1.0, id, p) == row.production.k);
    double prev = -1e300;
    for (double e = kEffortFloor; e <= kMaxEffort; e *= 1.3) {
      const double s = signal_mean(e, id, p);
      CHECK(s > prev);
      prev = s;
    }
  }
  CHECK(reference::signal_production_table().size() == std::size_t(kNumGroups));
}

TEST_CASE("signal draws") {
  ModelParams p = table_params();
  const GroupId g = sa_over45_high();
  SignalProduction zero = p.signal_for(g);
  zero.noise_var = 0.0;
  ModelParams q = p;
  q.signal[g] = zero;
  Rng rng(3);
  CHECK(draw_signal(2.0, g, q, rng) == signal_mean(2.0, g, q));

  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = draw_signal(2.0, g, p, rng);
  const double v = p.signal_for(g).noise_var;
  CHECK(std::abs(mean(draws) - signal_mean(2.0, g, p)) < 3 * std::sqrt(v / n));
  CHECK(variance(draws) == doctest::Approx(v).epsilon(0.05));
}

TEST_CASE("employer utility examples") {
  ModelParams p;
  const GroupId g(0);
  CHECK(employer_utility(123.0, 4.0, g, 0.0, p) == 0.0);
  p.alpha = 0.0110;
  p.beta = 0.1644;
  p.t_by_group[g] = 0.0;
  CHECK(employer_utility(100.0, 1.0, g, 0.0, p) == doctest::Approx(-0.9356).epsilon(1e-12));
  CHECK(employer_utility(100.0, 1.0, g, 2.0, p) == doctest::Approx(1.0644).epsilon(1e-12));
  CHECK(employer_utility(100.0, 1.0, g, 2.0, p) - employer_utility(100.0, 1.0, g, 0.0, p) ==
        doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("shifting T and the outside option together leaves choices unchanged") {
  // Outside utility pinned at 0 for every job; shifting it by c along with all
  // T is the same as leaving both alone.
  const std::vector<double> deltas = {0.3, -1.2, 0.9};
  const double c = 1.7;
  std::vector<double> shifted;
  for (double d : deltas) shifted.push_back(d + c - c);
  const auto p0 = choice_probabilities(deltas, 0.6);
  const auto p1 = choice_probabilities(shifted, 0.6);
  for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == doctest::Approx(p1[i]).epsilon(1e-14));
  // Shifting only T moves the choice probabilities.
  std::vector<double> inside_only;
  for (double d : deltas) inside_only.push_back(d + c);
  CHECK(choice_probabilities(inside_only, 0.6)[0] < p0[0]);
}

TEST_CASE("worker ex-post utility examples") {
  CHECK(worker_expost_utility(80.0, 0.0, 20.0, 1.0, false) == 0.0);
  CHECK(worker_expost_utility(100.0, 0.0, 40.0, 0.3, true) == 60.0);
  CHECK(worker_expost_utility(100.0, 1.0, 40.0, 0.0, true) == doctest::Approx(59.5));
  CHECK(worker_expost_utility(100.0, 1.0, 40.0, 0.0, false) == doctest::Approx(-0.5));
}

TEST_CASE("parameter validation") {
  ModelParams p = table_params();
  CHECK_NOTHROW(p.validate());
  ModelParams bad = p;
  bad.pi = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.signal.begin()->second.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(alpha_signed_from_disutility(0.011) == -0.011);
  CHECK(disutility_from_alpha_signed(-0.011) == 0.011);
  CHECK(ability_in_dollars(1.0, 0.1644, 0.011) == doctest::Approx(14.945454545));
}

}  // TEST_SUITE
