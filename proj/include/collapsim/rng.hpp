#pragma once

#include <cmath>
#include <cstdint>

// Self-contained random number generation. Everything here is fixed-width
// integer arithmetic plus libm, so a given (seed, draw sequence) produces the
// same values on every platform; std::<distribution> would not guarantee that.

namespace collapsim::rng {

/// SplitMix64 step. Used to derive stream seeds and to initialize xoshiro state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed, a purpose tag and
/// an index (herald number, channel id, chunk id, ...). Distinct inputs give
/// statistically unrelated streams, which keeps event generation partitionable.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= purpose * 0xd1342543de82ef95ull;
    std::uint64_t b = splitmix64(s);
    s ^= index * 0xaf251af3b0f025b5ull;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ c;
}

/// xoshiro256++ (Blackman & Vigna). Small, fast, and good enough statistics
/// for Monte Carlo sampling; state seeded via SplitMix64.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

/// Uniform double in [0, 1), 53-bit resolution.
template <class Gen>
double uniform01(Gen& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Exponential deviate with the given mean. 1-u is in (0,1], so the log is finite.
template <class Gen>
double exponential(Gen& g, double mean) {
    return -mean * std::log(1.0 - uniform01(g));
}

/// Standard normal deviate, Box-Muller (one value per call; always consumes
/// exactly two uniforms so the draw count is predictable).
template <class Gen>
double gaussian(Gen& g) {
    double u1 = 1.0 - uniform01(g);  // (0,1]
    double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Poisson deviate via Knuth's product method. Fine for the small means used
/// here (photon numbers ~1); not meant for mean >> 50.
template <class Gen>
std::uint64_t poisson(Gen& g, double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t n = 0;
    double prod = uniform01(g);
    while (prod >= limit) {
        ++n;
        prod *= uniform01(g);
    }
    return n;
}

// Purpose tags for derive_seed. Arbitrary distinct constants.
inline constexpr std::uint64_t kStreamHeralds = 0x4845524c44ull;      // herald arrivals
inline constexpr std::uint64_t kStreamTransport = 0x5452414e53ull;    // per-herald optics + detection
inline constexpr std::uint64_t kStreamDarkCounts = 0x4441524b53ull;   // per-channel dark processes
inline constexpr std::uint64_t kStreamAfterpulse = 0x4146545250ull;   // per-channel afterpulsing
inline constexpr std::uint64_t kStreamPhaseBaseline = 0x50483000ull;  // run phases
inline constexpr std::uint64_t kStreamPhaseGrating = 0x50483100ull;

}  // namespace collapsim::rng
