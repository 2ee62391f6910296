#pragma once

#include <cstdint>
#include <vector>

namespace asterlab::num {

// Deterministic random stream used everywhere randomness is needed.
//
// The generator is splitmix64; every derived draw is defined on top of the
// raw 64-bit stream so that tests can replay it:
//   next_u64():      state += 0x9E3779B97F4A7C15; z = state;
//                    z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//                    z = (z ^ z>>27) * 0x94D049BB133111EB;
//                    return z ^ z>>31;
//   next_double():   (next_u64() >> 11) * 2^-53, in [0, 1)
//   uniform_int(n):  next_u64() % n, in [0, n)
//   uniform(a, b):   a + (b - a) * next_double()
//   poisson(lam):    Knuth product method over next_double()
//   sample_distinct: partial Fisher-Yates over 0..n-1 using uniform_int
//   shuffle:         Fisher-Yates, descending index, uniform_int(i + 1)
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    int uniform_int(int n) {
        return n <= 0 ? 0 : static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    int poisson(double lambda);

    // k distinct values from 0..n-1, in selection order.
    std::vector<int> sample_distinct(int n, int k);

    void shuffle(std::vector<int>& v);
    void shuffle(std::vector<long>& v);

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

  private:
    std::uint64_t state_;
};

}  // namespace asterlab::num
