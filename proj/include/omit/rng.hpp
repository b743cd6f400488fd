#pragma once

#include <cstdint>
#include <string>

namespace omit {

// Deterministic RNG utilities. std::mt19937_64 output is pinned by the
// standard, but the standard <random> distributions are not; the mappings
// here are, so generated corpora and sampled streams are bit-reproducible
// across toolchains.

// SplitMix64 step. Used both as a generator and to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small counter-based stream: every (seed, key...) pair is an independent
// substream, so work can be sharded in any order without changing output.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        splitmix64(state_);
    }

    RngStream fork(std::uint64_t key) const {
        std::uint64_t s = state_ ^ (0x632be59bd9b4e019ULL * (key + 1));
        return RngStream(s);
    }

    RngStream fork(const std::string& key) const {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (unsigned char c : key) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return fork(h);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n); n > 0. Modulo bias is irrelevant for the
    // corpus sizes involved and keeps the mapping trivially portable.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

}  // namespace omit
