#include "lmsig/random.h"

#include <cmath>

namespace lmsig {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t index) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ splitmix64(stream_id + 0x51ed27ULL));
  s = splitmix64(s ^ splitmix64(index + 0x2545f491ULL));
  return Rng(s);
}

Rng Rng::stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index) {
  return stream(master_seed, hash_name(name), index);
}

double Rng::uniform_open() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return u;
}

double Rng::gumbel() { return -std::log(-std::log(uniform_open())); }

}  // namespace lmsig
