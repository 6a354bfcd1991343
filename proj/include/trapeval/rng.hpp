#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace trapeval {

// Deterministic splitmix64 generator. std::mt19937 + distributions are
// implementation-defined across standard libraries, so everything that has
// to reproduce byte-identical outputs goes through this.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    size_t index(size_t n) { return static_cast<size_t>(below(n)); }

    // Uniform in [lo, hi] inclusive.
    uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    bool chance(double p) {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// FNV-1a over the parts, finalized through splitmix64 so nearby inputs give
// unrelated streams. Used to derive per-item/per-kind seeds from the run seed.
uint64_t mix_seed(uint64_t base, std::string_view tag, uint64_t ordinal);

} // namespace trapeval
