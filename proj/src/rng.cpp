#include "asterlab/rng.hpp"

#include <cmath>
#include <numeric>

namespace asterlab::num {

int Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= next_double();
    } while (p > limit);
    return k - 1;
}

std::vector<int> Rng::sample_distinct(int n, int k) {
    if (k > n) k = n;
    if (k <= 0) return {};
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const int j = i + uniform_int(n - i);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
}

void Rng::shuffle(std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        const int j = uniform_int(i + 1);
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
}

void Rng::shuffle(std::vector<long>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        const int j = uniform_int(i + 1);
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
}

}  // namespace asterlab::num
