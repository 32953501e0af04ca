#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sama/common.hpp"

namespace sama {

// Deterministic RNG built on mt19937_64 (bit-exact across platforms) with
// hand-rolled uniform/normal conversions, since the std:: distributions are
// not pinned by the standard. Streams are derived from an immutable base
// seed so parallel workers can be given independent, reproducible streams.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    static uint64_t mix(uint64_t a, uint64_t b) {
        // splitmix64 finalizer over the combined words
        uint64_t z = a + 0x9e3779b97f4a7c15ull + (b << 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Child stream; does not consume state from this stream.
    Rng derive(uint64_t stream) const { return Rng(mix(seed_, stream)); }
    Rng derive(uint64_t a, uint64_t b) const { return Rng(mix(mix(seed_, a), b)); }

    uint64_t seed() const { return seed_; }
    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    double normal() {
        // Box-Muller, no caching so draw counts stay predictable
        double u1 = uniform();
        double u2 = uniform();
        u1 = std::max(u1, 0x1.0p-60);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Vec normal_vec(int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Mat normal_mat(int rows, int cols) {
        Mat m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = normal();
        return m;
    }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace sama
