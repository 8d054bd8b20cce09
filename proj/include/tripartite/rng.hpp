#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tripartite {

//! Deterministic random stream (splitmix64 core). All variate transforms are
//! implemented locally so sequences never depend on standard-library
//! distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                       // in [0, 1)
  double uniform(double lo, double hi);   // in [lo, hi)
  int uniform_int(int bound);             // in [0, bound), unbiased
  double normal();                        // standard normal (Box-Muller)
  double normal(double mean, double stddev);
  double gamma(double shape);             // unit scale (Marsaglia-Tsang)
  double beta(double a, double b);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

  //! Independent substream, a function of the original seed and `stream`
  //! only (not of how much this stream has been consumed).
  Rng derive(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace tripartite
