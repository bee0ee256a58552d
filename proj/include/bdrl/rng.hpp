#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bdrl {

/// 64-bit finalizer from SplitMix64; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed derivation that depends on every key in order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept;

/**
 * Seeded random stream for one experiment run.
 *
 * Uniform variates are built from the raw 64-bit engine output so the
 * sequence is identical across standard library implementations.
 * Child streams obtained with split() never share state with the parent.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}
    RngStream(std::uint64_t seed, std::string_view name)
        : RngStream(derive_seed(seed, name)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    RngStream split(std::uint64_t key) const { return RngStream(derive_seed(seed_, key)); }
    RngStream split(std::string_view name) const { return RngStream(derive_seed(seed_, name)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace bdrl
