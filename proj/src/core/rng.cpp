#include "c2st/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace c2st {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t x = hash_combine(seed, stream);
    for (auto& word : s_) word = splitmix64(x);
    // xoshiro must not start from the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() noexcept {
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

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) noexcept {
    // Rejection on the top of the 64-bit range removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = next_u64();
    } while (draw >= limit);
    return draw % bound;
}

double Rng::normal() noexcept {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = kTwoPi * uniform();
    spare_normal_ = radius * std::sin(angle);
    has_spare_normal_ = true;
    return radius * std::cos(angle);
}

double Rng::student_t2() noexcept {
    const double u = uniform_open();
    return (2.0 * u - 1.0) / std::sqrt(2.0 * u * (1.0 - u));
}

std::uint64_t Rng::binomial(std::uint64_t trials, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0, 1]");
    if (trials == 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;

    const double n = static_cast<double>(trials);
    const double mean = n * p;
    const double sd = std::sqrt(mean * (1.0 - p));
    const std::uint64_t mode =
        std::min(trials, static_cast<std::uint64_t>(std::floor((n + 1.0) * p)));
    // Mass beyond 40 standard deviations (plus slack for tiny n) is below
    // double resolution of the normalizer.
    const double reach = 40.0 * sd + 16.0;
    const std::uint64_t lo =
        mean - reach <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(mean - reach));
    const std::uint64_t hi =
        mean + reach >= n ? trials : static_cast<std::uint64_t>(std::ceil(mean + reach));

    // Relative pmf w(k) = pmf(k)/pmf(mode) by the ratio recurrence.
    std::vector<double> weight(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const double odds = p / (1.0 - p);
    weight[mode - lo] = 1.0;
    for (std::uint64_t k = mode; k < hi; ++k) {
        const double kk = static_cast<double>(k);
        weight[k + 1 - lo] = weight[k - lo] * (n - kk) / (kk + 1.0) * odds;
    }
    for (std::uint64_t k = mode; k > lo; --k) {
        const double kk = static_cast<double>(k);
        weight[k - 1 - lo] = weight[k - lo] * kk / (n - kk + 1.0) / odds;
    }
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    const double target = uniform() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        cumulative += weight[i];
        if (target < cumulative) return lo + i;
    }
    return hi;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order));
    return order;
}

Rng Rng::split() { return Rng(next_u64(), stream_ ^ 0xa5a5a5a5a5a5a5a5ULL); }

std::uint64_t stable_hash(std::string_view key) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : key) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t x = a;
    const std::uint64_t ha = splitmix64(x);
    x = b ^ 0x6a09e667f3bcc909ULL;
    const std::uint64_t hb = splitmix64(x);
    std::uint64_t mixed = ha ^ (hb + 0x9e3779b97f4a7c15ULL + (ha << 6) + (ha >> 2));
    return splitmix64(mixed);
}

} // namespace c2st
