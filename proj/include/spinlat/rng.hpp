#pragma once

#include <cmath>
#include <cstdint>

namespace spinlat {

// splitmix64 step (Steele/Lea/Flood). All randomness in the project flows
// through this mix so that results are bit-identical across platforms;
// std::random distributions are implementation-defined and not used.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Documented seed derivation: two splitmix64 rounds over master xor a
// golden-ratio multiple of the tag. Used for replica seeds, per-site
// arrival streams and experiment tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (tag + 0x243f6a8885a308d3ULL));
    splitmix64_next(s);
    return splitmix64_next(s);
}

// FNV-1a, used to tag experiment kinds and hash canonical config strings.
inline std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::uint64_t state_;
};

}  // namespace spinlat
