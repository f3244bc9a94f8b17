#include <cmath>
#include <vector>

#include <doctest.h>

#include "lmsig/groups.h"
#include "lmsig/model.h"
#include "lmsig/random.h"
#include "lmsig/win_probability.h"
#include "oracles.h"

using namespace lmsig;

namespace {

const GroupId kA = group_id({CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kMiddle});
const GroupId kB = group_id({CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr0to5, ReputationGroup::kRookie});
const GroupId kMissing = group_id({CountryGroup::kOther, ArrivalGroup::kArrOver45, ReputationGroup::kHigh});

std::vector<std::vector<CompetitorDraw>> random_jobs(int n, Rng& rng) {
  std::vector<std::vector<CompetitorDraw>> jobs(n);
  for (auto& job : jobs) {
    const int size = 1 + int(rng.index(8));
    for (int j = 0; j < size; ++j)
      job.push_back({rng.bernoulli(0.5) ? kA : kB, rng.bernoulli(0.7), rng.uniform(30, 250),
                     rng.normal(8, 2)});
  }
  return jobs;
}

SimulationPool test_pool(std::uint64_t seed, int n = 1500) {
  Rng rng(seed);
  const auto jobs = random_jobs(n, rng);
  GroupMap<double> k{{kA, 0.5}, {kB, -0.3}}, gamma{{kA, 0.6}, {kB, 0.45}};
  GroupMap<SignalProduction> sp{{kA, {5.0, 1.2, 1.5}}, {kB, {4.0, 0.9, 2.0}}};
  return make_pool(jobs, -0.02, 0.6, SignalIndex::linear(k, gamma), sp, rng);
}

// Straight average over slots, written out from the pool contents.
double direct_average(const SimulationPool& pool, double b, double e, GroupId g) {
  const auto& sp = pool.signal.at(g);
  const double k = pool.index.k->at(g), gm = pool.index.gamma->at(g);
  double sum = 0;
  const auto& slots = pool.slots.at(g);
  for (const auto& s : slots) {
    if (!s.considered) continue;
    const double signal = sp.k + sp.gamma * std::log(e) + s.noise;
    const double w = std::exp(k + gm * signal + pool.alpha_signed * b);
    sum += w / (1 + s.delta_others + w);
  }
  return pool.pi * sum / double(slots.size());
}

}  // namespace

TEST_SUITE("win_probability") {

TEST_CASE("no competitors and a zero index gives pi / 2") {
  Rng rng(1);
  std::vector<std::vector<CompetitorDraw>> jobs(10, {{kA, true, 100.0, 0.0}});
  const double alpha = -0.01;
  // A lone applicant leaves no competitor weight in its slot; the index is K + alpha b.
  GroupMap<double> k{{kA, 1.0}}, gamma{{kA, 0.0}};
  GroupMap<SignalProduction> sp{{kA, {0.0, 1.0, 0.0}}};
  const auto pool = make_pool(jobs, alpha, 0.7, SignalIndex::linear(k, gamma), sp, rng);
  CHECK(win_probability(pool, 100.0, 1.0, kA) == doctest::Approx(0.7 / 2).epsilon(1e-14));
  CHECK(win_probability(pool, 100.0, 3.0, kA) == doctest::Approx(0.7 / 2).epsilon(1e-14));
}

TEST_CASE("pool average matches a direct evaluation and a simulated choice") {
  const auto pool = test_pool(4);
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const double b = rng.uniform(30, 250), e = std::exp(rng.uniform(-2.5, 2.4));
    const GroupId g = rng.bernoulli(0.5) ? kA : kB;
    CHECK(win_probability(pool, b, e, g) ==
          doctest::Approx(direct_average(pool, b, e, g)).epsilon(1e-12));
  }
  // Monte Carlo: abandon with 1 - pi, otherwise choose among the outside option,
  // the deviator and the considered competitors in proportion to their weights.
  const double b = 90, e = 2.0;
  const auto& slots = pool.slots.at(kA);
  const auto& sp = pool.signal.at(kA);
  const int draws = 400000;
  int wins = 0;
  for (int i = 0; i < draws; ++i) {
    const auto& s = slots[rng.index(slots.size())];
    if (!s.considered || !rng.bernoulli(pool.pi)) continue;
    const double w = std::exp(0.5 + 0.6 * (sp.k + sp.gamma * std::log(e) + s.noise) - 0.02 * b);
    if (rng.uniform() * (1 + s.delta_others + w) < w) wins++;
  }
  const double p = win_probability(pool, b, e, kA);
  const double se = std::sqrt(p * (1 - p) / draws);
  CHECK(std::abs(double(wins) / draws - p) <= 3 * se);
}

TEST_CASE("a general index with the same linear form agrees") {
  auto pool = test_pool(5, 400);
  const double p = win_probability(pool, 120, 1.5, kB);
  const auto g = win_probability_gradient(pool, 120, 1.5, kB);
  const auto k = *pool.index.k, gamma = *pool.index.gamma;
  pool.index = SignalIndex{};
  pool.index.general = [k, gamma](double s, GroupId grp) {
    return std::pair{k.at(grp) + gamma.at(grp) * s, gamma.at(grp)};
  };
  pool.prepare();
  CHECK(pool.multipliers(kB) == nullptr);
  CHECK(win_probability(pool, 120, 1.5, kB) == doctest::Approx(p).epsilon(1e-12));
  const auto g2 = win_probability_gradient(pool, 120, 1.5, kB);
  CHECK(g2.first == doctest::Approx(g.first).epsilon(1e-10));
  CHECK(g2.second == doctest::Approx(g.second).epsilon(1e-10));
}

TEST_CASE("analytic partials match finite differences") {
  const auto pool = test_pool(6);
  Rng rng(2);
  for (int t = 0; t < 40; ++t) {
    const double b = rng.uniform(35, 245), e = std::exp(rng.uniform(-2.5, 2.4));
    const GroupId g = rng.bernoulli(0.5) ? kA : kB;
    const auto [db, de] = win_probability_gradient(pool, b, e, g);
    const double hb = 1e-4, he = 1e-6 * e;
    const double fb = (win_probability(pool, b + hb, e, g) - win_probability(pool, b - hb, e, g)) / (2 * hb);
    const double fe = (win_probability(pool, b, e + he, g) - win_probability(pool, b, e - he, g)) / (2 * he);
    CHECK(std::abs(db - fb) <= 1e-6 * std::max(1.0, std::abs(fb)));
    CHECK(std::abs(de - fe) <= 1e-6 * std::max(1.0, std::abs(fe)));
  }
}

TEST_CASE("shape: bounded by pi, falling in the bid, rising in effort") {
  const auto pool = test_pool(7);
  for (GroupId g : {kA, kB}) {
    for (double b = 30; b <= 250; b += 20) {
      for (double e : {0.07, 0.3, 1.0, 4.0, 12.0}) {
        const auto pt = win_probability_point(pool, b, e, g);
        CHECK(pt.p >= 0);
        CHECK(pt.p <= pool.pi);
        CHECK(pt.dp_db < 0);
        CHECK(pt.dp_de > 0);
      }
    }
  }
}

TEST_CASE("errors: absent group and non-positive effort") {
  const auto pool = test_pool(8, 100);
  CHECK_THROWS_AS(win_probability(pool, 100, 1, kMissing), std::out_of_range);
  CHECK_THROWS_AS(win_probability(pool, 100, 0, kA), std::domain_error);
  ExactSurface s(pool);
  CHECK_FALSE(s.has_group(kMissing));
  CHECK(s.has_group(kA));
}

TEST_CASE("pools are deterministic given the seed") {
  const auto a = test_pool(11, 300), b = test_pool(11, 300), c = test_pool(12, 300);
  for (GroupId g : {kA, kB}) {
    REQUIRE(a.slots.at(g).size() == b.slots.at(g).size());
    for (std::size_t i = 0; i < a.slots.at(g).size(); ++i) {
      CHECK(a.slots.at(g)[i].noise == b.slots.at(g)[i].noise);
      CHECK(a.slots.at(g)[i].delta_others == b.slots.at(g)[i].delta_others);
    }
  }
  CHECK(win_probability(a, 80, 1, kA) != win_probability(c, 80, 1, kA));
}

TEST_CASE("standard errors shrink with the pool size") {
  const auto small = test_pool(13, 300), large = test_pool(13, 4800);
  const auto s1 = win_probability_se(small, 100, 1.0, kA);
  const auto s2 = win_probability_se(large, 100, 1.0, kA);
  CHECK(s1.p > 0);
  CHECK(s2.p < s1.p);
  CHECK(s2.p / s1.p == doctest::Approx(0.25).epsilon(0.25));
}

TEST_CASE("cached surface: exact at nodes, close between them, clamped outside") {
  const auto pool = test_pool(14, 800);
  ExactSurface exact(pool);
  CachedSurface cached(exact, {kA, kB});
  CHECK(cached.has_group(kA));
  CHECK_FALSE(cached.has_group(kMissing));
  const double node_b = kMinBid + (kMaxBid - kMinBid) * 10.0 / 44.0;
  const double node_e = std::exp(std::log(kEffortFloor) + (std::log(kMaxEffort) - std::log(kEffortFloor)) * 7.0 / 39.0);
  CHECK(cached.eval(node_b, node_e, kA).p == doctest::Approx(exact.eval(node_b, node_e, kA).p).epsilon(1e-12));
  Rng rng(3);
  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    const double b = rng.uniform(30, 250), e = std::exp(rng.uniform(std::log(kEffortFloor), std::log(kMaxEffort)));
    worst = std::max(worst, std::abs(cached.eval(b, e, kB).p - exact.eval(b, e, kB).p));
  }
  CHECK(worst < 1e-3);
  CHECK(cached.eval(400, 50, kA).p == doctest::Approx(cached.eval(kMaxBid, kMaxEffort, kA).p));
  CHECK(cached.eval(1, 1e-4, kA).p == doctest::Approx(cached.eval(kMinBid, kEffortFloor, kA).p));
  CHECK_THROWS_AS(cached.eval(100, 1, kMissing), std::out_of_range);
}

TEST_CASE("payoff partials from the surface match finite differences of the payoff") {
  const oracle::LogitSurface s(0.6, 2.5, 0.6, -0.03, 1.0);
  const auto pt = s.eval(120, 2.0, kA);
  const double h = 1e-5;
  CHECK(pt.dp_db == doctest::Approx((s.eval(120 + h, 2, kA).p - s.eval(120 - h, 2, kA).p) / (2 * h)).epsilon(1e-7));
  CHECK(pt.dp_de == doctest::Approx((s.eval(120, 2 + h, kA).p - s.eval(120, 2 - h, kA).p) / (2 * h)).epsilon(1e-7));
}

}  // TEST_SUITE
