#ifndef VOXMARK_RNG_HPP
#define VOXMARK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace voxmark {

// All randomness in the toolkit flows from one user-supplied seed. Each
// consumer derives its own stream by hashing a name (and optional indices)
// into the seed, so adding a consumer never perturbs the others.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_stream(std::uint64_t seed, std::string_view name,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = seed ^ fnv1a64(name);
    h = mix64(h + 0x632be59bd9b4e019ull * a);
    h = mix64(h + 0x9e3779b97f4a7c15ull * b);
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view name,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(seed_stream(seed, name, a, b));
}

// Uniform in [0,1). Drawn explicitly so results do not depend on the
// standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

// Box-Muller standard normal; pinned implementation for reproducible phantoms.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Fisher-Yates with draws from the pinned uniform.
template <typename T>
void shuffle_pinned(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace voxmark

#endif
