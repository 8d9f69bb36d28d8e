#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace clut {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence is
// fixed by the standard) but derives all variates with explicit arithmetic, so
// streams are reproducible across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; generates pairs and caches the second.
    double normal();

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Mixes two values into a fresh seed (splitmix64 finalizer).
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

private:
    std::mt19937_64 eng_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

std::vector<double> normal_vector(Rng& rng, std::size_t n);

} // namespace clut
