#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace dsos {

namespace detail {

// splitmix64 step; used for seed expansion and stream derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_streams(std::uint64_t key, std::uint64_t stream) noexcept {
    std::uint64_t s = key;
    std::uint64_t a = splitmix64(s);
    s ^= stream;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x632be59bd9b4e019ull);
}

} // namespace detail

// Stable child seed for (seed, stream); matches Rng::derive.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return detail::mix_streams(seed, stream);
}

// Seedable generator with explicit stream derivation. Distribution transforms
// are implemented here (not via std::*_distribution) so that sequences are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(seed), engine_(expand_seed(seed)) {}

    // Independent stream keyed by (this generator's seed, stream id).
    // Does not depend on how much has been drawn from *this.
    Rng fork(std::uint64_t stream) const { return Rng(detail::mix_streams(key_, stream)); }

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(detail::mix_streams(seed, stream));
    }

    std::uint64_t seed_key() const noexcept { return key_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    double exponential() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u);
    }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        shuffle(std::span<T>(values));
    }

    // k distinct indices from [0, n), in sampling order (partial Fisher-Yates).
    std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<std::uint32_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::mt19937_64 expand_seed(std::uint64_t seed) {
        std::uint64_t s = seed;
        return std::mt19937_64(detail::splitmix64(s));
    }

    std::uint64_t key_;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace dsos
