#include "lmsig/beliefs.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmsig {

std::vector<double> pava(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw std::invalid_argument("pava: size mismatch");
  struct Block {
    double sum_wy, sum_w;
    std::size_t len;
    double value() const { return sum_wy / sum_w; }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(w[i] > 0)) throw std::invalid_argument("pava: weights must be positive");
    blocks.push_back({w[i] * y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value() > blocks.back().value()) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum_wy += top.sum_wy;
      blocks.back().sum_w += top.sum_w;
      blocks.back().len += top.len;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.value());
  return out;
}

namespace {

double end_slope(double h0, double h1, double d0, double d1) {
  double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (std::signbit(m) != std::signbit(d0) || m == 0.0 || d0 == 0.0) return 0.0;
  if (std::signbit(d0) != std::signbit(d1) && std::abs(m) > 3 * std::abs(d0)) m = 3 * d0;
  return m;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || x_.size() != y_.size())
    throw std::invalid_argument("MonotoneCubic needs matching, nonempty knot arrays");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("MonotoneCubic knots must increase");
  const std::size_t n = x_.size();
  m_.assign(n, 0.0);
  if (n == 1) return;
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    m_[0] = m_[1] = d[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double a = d[k - 1], b = d[k];
    if (a == 0.0 || b == 0.0 || std::signbit(a) != std::signbit(b)) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    m_[k] = (w1 + w2) / (w1 / a + w2 / b);
  }
  m_[0] = end_slope(h[0], h[1], d[0], d[1]);
  m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double MonotoneCubic::operator()(double s) const {
  if (x_.empty()) throw std::logic_error("empty interpolant");
  if (s <= x_.front()) return y_.front();
  if (s >= x_.back()) return y_.back();
  const std::size_t i = std::upper_bound(x_.begin(), x_.end(), s) - x_.begin() - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (s - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  // Written as an increment over the left knot so a flat piece is exactly flat;
  // the clamp keeps rounding from stepping outside the segment's range.
  const double dy = y_[i + 1] - y_[i];
  const double inc = (3 * t2 - 2 * t3) * dy + h * ((t3 - 2 * t2 + t) * m_[i] + (t3 - t2) * m_[i + 1]);
  return std::clamp(y_[i] + inc, std::min(y_[i], y_[i + 1]), std::max(y_[i], y_[i + 1]));
}

double MonotoneCubic::derivative(double s) const {
  if (x_.size() < 2 || s <= x_.front() || s >= x_.back()) return 0.0;
  const std::size_t i = std::upper_bound(x_.begin(), x_.end(), s) - x_.begin() - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (s - x_[i]) / h;
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * y_[i] + (3 * t2 - 4 * t + 1) * m_[i] +
         (-6 * t2 + 6 * t) / h * y_[i + 1] + (3 * t2 - 2 * t) * m_[i + 1];
}

GroupBelief fit_group_belief(std::vector<std::pair<double, double>> points, int n_bins,
                             std::vector<std::string>* diagnostics, const std::string& label) {
  auto note = [&](const std::string& msg) {
    if (diagnostics) diagnostics->push_back(label + ": " + msg);
  };
  if (points.empty()) throw std::invalid_argument("no belief data for group " + label);
  std::sort(points.begin(), points.end());
  const int n = static_cast<int>(points.size());

  GroupBelief gb;
  if (points.front().first == points.back().first) {
    double sum = 0;
    for (const auto& p : points) sum += p.second;
    gb.knot_signal = {points.front().first};
    gb.knot_ability = {sum / n};
    gb.knot_weight = {double(n)};
    gb.curve = MonotoneCubic(gb.knot_signal, gb.knot_ability);
    gb.n_bins = 1;
    note("fewer than two distinct signals, constant belief at the group mean");
    return gb;
  }

  int bins = n_bins;
  if (n < n_bins) {
    bins = std::min(n, std::max(5, n / 10));
    gb.reduced_bins = true;
    note("only " + std::to_string(n) + " observations, using " + std::to_string(bins) + " bins");
  }
  gb.n_bins = bins;

  std::vector<double> xs, ys, ws;
  for (int b = 0; b < bins; ++b) {
    const int lo = static_cast<int>(std::int64_t(b) * n / bins);
    const int hi = static_cast<int>(std::int64_t(b + 1) * n / bins);
    if (hi <= lo) continue;
    double sx = 0, sy = 0;
    for (int i = lo; i < hi; ++i) sx += points[i].first, sy += points[i].second;
    const double w = hi - lo;
    const double mx = sx / w, my = sy / w;
    // Knots with identical mean signal are merged.
    if (!xs.empty() && mx <= xs.back()) {
      const double tw = ws.back() + w;
      ys.back() = (ys.back() * ws.back() + my * w) / tw;
      xs.back() = (xs.back() * ws.back() + mx * w) / tw;
      ws.back() = tw;
      continue;
    }
    xs.push_back(mx);
    ys.push_back(my);
    ws.push_back(w);
  }
  gb.knot_signal = xs;
  gb.knot_ability = pava(ys, ws);
  gb.knot_weight = ws;
  gb.curve = MonotoneCubic(gb.knot_signal, gb.knot_ability);
  return gb;
}

BeliefFunction fit_beliefs(const BeliefData& data, int n_bins) {
  BeliefFunction f;
  for (const auto& [g, pts] : data)
    f.groups[g] = fit_group_belief(pts, n_bins, &f.diagnostics, group_label(g));
  return f;
}

double evaluate_belief(const BeliefFunction& f, double s, GroupId g) {
  auto it = f.groups.find(g);
  if (it == f.groups.end()) throw std::out_of_range("no belief for group " + group_label(g));
  return it->second(s);
}

}  // namespace lmsig
