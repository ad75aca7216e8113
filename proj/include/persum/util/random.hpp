#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace persum {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` of a run seeded with `seed` (e.g. one bootstrap
/// resample). Independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng{derive_seed(seed, stream)};
}

inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

// Distributions come from Boost.Random rather than <random>: the standard
// leaves their algorithms unspecified, so draws would differ by platform.

/// Uniform index in [0, n). n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

inline double normal_draw(Rng& rng, double mean, double sd) {
    return boost::random::normal_distribution<double>{mean, sd}(rng);
}

/// Fisher-Yates with our own index draw so the permutation depends only on
/// the engine, not on the standard library's shuffle.
template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

/// k distinct indices from [0, n), in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i < n; ++i) {
        std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    }
    idx.resize(std::min(k, n));
    return idx;
}

} // namespace persum
