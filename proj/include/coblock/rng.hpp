#pragma once
// Counter-based splittable RNG built on the splitmix64 finalizer.
// Every draw is a pure hash of (key, counter), so child streams derived
// from a master seed produce the same values whether replicates run
// sequentially or in parallel.

#include <cstdint>
#include <initializer_list>

namespace coblock {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Derive a child seed from a master seed and a list of tags, e.g.
// derive_seed(master, {n, rep, candidate_index}).
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t t : tags) s = hash_combine(s, t);
    return s;
}

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : key_(mix64(seed)) {}

    std::uint64_t next_u64() { return hash_combine(key_, counter_++); }

    // Uniform on [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;  // modulo bias is negligible for desk-scale n
    }

    // Standard normal via Box-Muller (no cached second value).
    double next_gaussian();

    // Child stream independent of draws already taken from this one.
    SplitRng split(std::uint64_t tag) const {
        return SplitRng(hash_combine(hash_combine(key_, 0xd1b54a32d192ed03ull), tag));
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace coblock
