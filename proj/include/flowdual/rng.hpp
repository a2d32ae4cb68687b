#pragma once

#include <cstdint>
#include <random>

namespace flowdual {

/// Independent random substreams keyed by (seed, family, path, stream).
///
/// The key is hashed with the splitmix64 finalizer and used to seed a
/// Mersenne twister, so a path's draws depend only on its key and never on
/// worker count or evaluation order.
namespace substream {

enum : std::uint64_t {
    brownian = 1,
    brownian_second = 2,
    jumps = 3,
};

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t family, std::uint64_t path,
                         std::uint64_t stream) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ family);
    h = mix(h ^ path);
    return mix(h ^ stream);
}

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t family, std::uint64_t path,
                              std::uint64_t stream) {
    return std::mt19937_64(key(seed, family, path, stream));
}

}  // namespace substream

/// Seed families: forward and dual estimators draw from distinct families so
/// they are statistically independent even when sharing a user seed.
namespace family {
inline constexpr std::uint64_t forward = 0;
inline constexpr std::uint64_t dual = 1;
inline constexpr std::uint64_t pilot = 2;
}  // namespace family

}  // namespace flowdual
