#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "lmsig/beliefs.h"
#include "lmsig/groups.h"
#include "lmsig/random.h"
#include "lmsig/stats.h"
#include "oracles.h"

using namespace lmsig;

namespace {

const GroupId kG = group_id({CountryGroup::kOther, ArrivalGroup::kArr0to5, ReputationGroup::kMiddle});

// Weighted isotonic fit by enumerating contiguous partitions; a partition is
// admissible when its block means are nondecreasing.
std::vector<double> brute_weighted(const std::vector<double>& y, const std::vector<double>& w) {
  const int n = static_cast<int>(y.size());
  double best = 1e300;
  std::vector<double> out;
  for (unsigned cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    double prev = -1e300, sse = 0;
    bool ok = true;
    int start = 0;
    for (int i = 0; i < n && ok; ++i) {
      if (i == n - 1 || (cuts >> i & 1u)) {
        double sw = 0, swy = 0;
        for (int k = start; k <= i; ++k) sw += w[k], swy += w[k] * y[k];
        const double m = swy / sw;
        if (m < prev) ok = false;
        prev = m;
        for (int k = start; k <= i; ++k) fit[k] = m, sse += w[k] * (y[k] - m) * (y[k] - m);
        start = i + 1;
      }
    }
    if (ok && sse < best) best = sse, out = fit;
  }
  return out;
}

}  // namespace

TEST_SUITE("beliefs") {

TEST_CASE("PAVA equals the exhaustive fit on every short integer sequence") {
  long checked = 0, mismatched = 0;
  for (int len = 1; len <= 8; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<int> yi(len);
      for (int i = 0, c = code; i < len; ++i, c /= 4) yi[i] = c % 4;
      const std::vector<double> y(yi.begin(), yi.end()), w(len, 1.0);
      if (pava(y, w) != oracle::exhaustive_isotonic(yi)) ++mismatched;
      ++checked;
    }
  }
  CHECK(checked == 87380);
  CHECK(mismatched == 0);
}

TEST_CASE("PAVA examples and weighted fits") {
  CHECK(pava(std::vector<double>{3, 1, 2}, std::vector<double>{1, 1, 1}) == std::vector<double>{2, 2, 2});
  const std::vector<double> up{-1, 0.5, 0.5, 2, 7};
  CHECK(pava(up, std::vector<double>(5, 3.0)) == up);
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + int(rng.index(9));
    std::vector<double> y(n), w(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal(), w[i] = rng.uniform(0.1, 5.0);
    const auto got = pava(y, w), want = brute_weighted(y, w);
    for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  CHECK_THROWS(pava(std::vector<double>{1, 2}, std::vector<double>{1, 0}));
}

TEST_CASE("monotone cubic: knots, flat pieces, tails and no overshoot") {
  const std::vector<double> x{-2, -0.5, 0.3, 1.0, 2.5, 4.0, 6.0};
  const std::vector<double> y{-1, -1, 0.2, 0.25, 1.5, 1.5, 3.0};
  const MonotoneCubic f(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(f(x[i]) - y[i]) <= 1e-12);
  CHECK(f(-1.25) == -1.0);
  CHECK(f(3.25) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(f(-100) == -1.0);
  CHECK(f(100) == 3.0);
  double prev = -1e300;
  for (int i = 0; i <= 10000; ++i) {
    const double s = -3 + 10.0 * i / 10000;
    const double v = f(s);
    CHECK(v >= prev);
    CHECK(v >= -1.0);
    CHECK(v <= 3.0);
    prev = v;
  }
  // Continuous across knots and differentiable between them.
  for (double k : x) CHECK(std::abs(f(k + 1e-9) - f(k - 1e-9)) < 1e-8);
  for (double s : {-1.0, 0.0, 0.7, 2.0, 5.1}) {
    const double h = 1e-6;
    CHECK(f.derivative(s) == doctest::Approx((f(s + h) - f(s - h)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(f.derivative(-50) == 0.0);
  const MonotoneCubic one({2.0}, {0.7});
  CHECK(one(-5) == 0.7);
  CHECK(one(5) == 0.7);
}

TEST_CASE("fitted beliefs recover a monotone relationship") {
  Rng rng(10);
  std::vector<std::pair<double, double>> pts;
  std::vector<double> truth, fitted;
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.normal(0, 1.5);
    pts.push_back({8 + 1.2 * a + rng.normal(0, 2), a});
  }
  const auto f = fit_beliefs({{kG, pts}});
  const auto& gb = f.groups.at(kG);
  CHECK(gb.n_bins == 50);
  CHECK_FALSE(gb.reduced_bins);
  CHECK(gb.knot_signal.size() == 50);
  CHECK(std::is_sorted(gb.knot_ability.begin(), gb.knot_ability.end()));
  for (double w : gb.knot_weight) CHECK(w == 100.0);
  for (std::size_t k = 0; k < gb.knot_signal.size(); ++k)
    CHECK(std::abs(evaluate_belief(f, gb.knot_signal[k], kG) - gb.knot_ability[k]) <= 1e-12);
  CHECK(evaluate_belief(f, -100, kG) == gb.knot_ability.front());
  CHECK(evaluate_belief(f, 100, kG) == gb.knot_ability.back());
  for (const auto& [s, a] : pts) truth.push_back(a), fitted.push_back(evaluate_belief(f, s, kG));
  CHECK(correlation(truth, fitted) > 0.5);
  double prev = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const double v = evaluate_belief(f, -5 + 26.0 * i / 9999, kG);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("small and degenerate groups") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({double(i), 0.1 * i});
  std::vector<std::string> diag;
  const auto gb = fit_group_belief(pts, 50, &diag, "g");
  CHECK(gb.reduced_bins);
  CHECK(gb.n_bins == 5);
  CHECK(gb.knot_signal.size() == 5);
  CHECK(gb.knot_weight == std::vector<double>(5, 6.0));
  REQUIRE(diag.size() == 1);

  const std::vector<std::pair<double, double>> flat{{3.0, 1.0}, {3.0, 2.0}, {3.0, 6.0}};
  const auto c = fit_group_belief(flat, 50);
  CHECK(c(0) == 3.0);
  CHECK(c(10) == 3.0);
  CHECK_THROWS_AS(fit_group_belief({}, 50), std::invalid_argument);
  BeliefFunction f;
  CHECK_THROWS_AS(evaluate_belief(f, 1.0, kG), std::out_of_range);
}

}  // TEST_SUITE
