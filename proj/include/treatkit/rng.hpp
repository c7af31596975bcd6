#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace treatkit {

// Deterministic PRNG used for every randomized operation (split plans,
// tie-breaking, CLI seed draws). xoshiro256** (Blackman & Vigna, 2018),
// state-initialized with splitmix64 so that any 64-bit seed is usable.
// Identical seeds produce identical streams on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        // splitmix64 expansion of the seed into the 256-bit state
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased draw from {0, ..., bound-1} by rejection on the top range.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace treatkit
