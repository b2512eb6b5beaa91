#pragma once

#include <cstdint>

// Self-contained random number primitives. Standard-library distributions are
// implementation-defined, so all transforms are spelled out here to keep
// sampled sequences identical across compilers and platforms.

namespace gridbid {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a master seed and task coordinates,
// so parallel workers own disjoint streams regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ull);
    h = splitmix64(h ^ splitmix64(a ^ 0xbb67ae8584caa73bull));
    h = splitmix64(h ^ splitmix64(b ^ 0x3c6ef372fe94f82bull));
    return h;
}

// xoshiro256** by Blackman and Vigna, seeded via splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) word = x = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one value per call, cached pair discarded
    // deliberately so the draw count per variate is fixed.
    double normal();

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Index in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace gridbid
