#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace c2st {

/// Deterministic pseudo-random generator keyed by (seed, stream).
///
/// The state is a xoshiro256** generator whose 256-bit state is expanded
/// from a SplitMix64 mix of the seed and the stream id, so distinct stream
/// ids give unrelated sequences. Every sampler below is implemented here
/// rather than through <random> distributions, whose output differs between
/// standard library implementations.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept;

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept;

    double normal() noexcept;

    /// Student t with 2 degrees of freedom, by exact inverse CDF.
    double student_t2() noexcept;

    /// Binomial(trials, p) by inversion of the exact pmf.
    std::uint64_t binomial(std::uint64_t trials, double p);

    /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// Independent child generator; the parent advances by one draw.
    Rng split();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4];
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

/// Stable 64-bit hash (FNV-1a) of a string key.
std::uint64_t stable_hash(std::string_view key) noexcept;

/// Order-sensitive mixing of two 64-bit values.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept;

} // namespace c2st
