#pragma once

#include <cstdint>
#include <string_view>

namespace delottery {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// What a stream of random draws is used for. Each purpose gets an
// independent stream for the same (seed, round).
enum class Purpose : std::uint64_t {
    Host = 1,
    Key = 2,
    Guess = 3,
    Proposer = 4,
    Honest = 5,
    Block = 6,
    Test = 99,
};

// Counter-based generator: value(i) = mix64(key + (i + 1) * gamma) with
// key = mix64(mix64(mix64(seed) ^ round) ^ purpose). Any draw can be
// recomputed from (seed, round, purpose, i) alone.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t round, Purpose purpose)
        : key_(derive_key(seed, round, static_cast<std::uint64_t>(purpose))) {}

    static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t round,
                                              std::uint64_t tag) {
        return mix64(mix64(mix64(seed) ^ (round * kGoldenGamma)) ^ (tag * 0xd1b54a32d192ed03ULL));
    }

    constexpr std::uint64_t at(std::uint64_t counter) const {
        return mix64(key_ + (counter + 1) * kGoldenGamma);
    }

    std::uint64_t next() { return at(counter_++); }

    // Unbiased integer in [0, bound), bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            auto x = next();
            if (x >= threshold) return x % bound;
        }
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace delottery
