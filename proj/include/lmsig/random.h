#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lmsig {

// Seeded random source. Streams are split deterministically from a master seed
// by hashing (seed, stream, index), so per-job draws do not depend on the order
// in which jobs are processed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t index = 0);
  static Rng stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index = 0);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  // Open interval (0, 1); safe for log and quantile transforms.
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gumbel();
  double chi_squared(double dof) { return std::chi_squared_distribution<double>(dof)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  int poisson(double mean) { return std::poisson_distribution<int>(mean)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

}  // namespace lmsig
