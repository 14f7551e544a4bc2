#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace auxfm {

/// xoshiro256** generator seeded through splitmix64.
///
/// Uniform doubles take the top 53 bits of one 64-bit output. Normal draws use
/// Box-Muller on two consecutive uniforms (u1 from (0,1], u2 from [0,1)):
/// the cosine branch is returned first and the sine branch is cached for the
/// next call. Ports that follow these rules reproduce the same sequences.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in (0, 1).
    double uniform_open();
    double uniform(double low, double high) { return low + (high - low) * uniform(); }
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Independent sub-stream. The child seed is splitmix64(seed ^ fnv1a64(name)),
    /// where `seed` is the seed this stream was constructed with. Splitting does
    /// not advance the parent.
    RngStream split(std::string_view name) const;
    RngStream split(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace auxfm
