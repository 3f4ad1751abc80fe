#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace forge {

// Deterministic random source: a xoshiro256** core seeded through splitmix64.
// Both algorithms are published with reference implementations, so a seeded
// stream can be replayed bit-exactly by any other implementation that follows
// kAlgorithm. Bounded draws use rejection sampling (no modulo bias), doubles
// take the top 53 bits, and derived streams are seeded with
// master_seed XOR fnv1a64(label). All of that is part of the replay contract.
class Rng {
public:
    static constexpr const char* kAlgorithm = "splitmix64+xoshiro256** v1";

    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    // Next raw 64-bit value.
    std::uint64_t next_u64();

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    // Uniform double in [0, 1) with 53 bits of precision.
    double unit();

    bool bernoulli(double p);

    // Independent stream for a named pipeline stage.
    Rng derive(std::string_view label) const;

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

}  // namespace forge
