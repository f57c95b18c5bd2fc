#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hcrc {

// Single error type for the whole library; messages carry the context
// (op name, shapes, line numbers) that callers need to act on.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a, 64-bit. Platform-independent string hashing so every derived
// feature and seed is reproducible across builds.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
    return splitmix64(s);
}

// Derives the seed for one (block, purpose) pair from the run's root seed.
// All randomness in the engine flows through this, which keeps independent
// stages reproducible and lets a resumed run pick up mid-stream.
inline uint64_t seed_for(uint64_t root, uint64_t block, std::string_view purpose) {
    return mix_seed(mix_seed(root, block + 1), fnv1a64(purpose));
}

}  // namespace hcrc
