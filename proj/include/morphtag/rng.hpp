#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace morphtag {

// Seeded RNG with hand-rolled draw functions. std::mt19937_64 output is
// fixed by the standard, but the std distributions are not; generating
// doubles and bounded ints ourselves keeps runs bit-identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is irrelevant for our n << 2^64.
  uint64_t below(uint64_t n) { return engine_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Deterministic child stream keyed on (seed, stream_id), independent of
  // how many draws the parent has made. Used for per-sentence dropout so
  // results do not depend on worker count or scheduling.
  Rng derive(uint64_t stream_id) const {
    uint64_t s = seed_ ^ (stream_id + 0x9e3779b97f4a7c15ULL);
    s ^= s >> 30;
    s *= 0xbf58476d1ce4e5b9ULL;
    s ^= s >> 27;
    s *= 0x94d049bb133111ebULL;
    s ^= s >> 31;
    return Rng(s);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace morphtag
