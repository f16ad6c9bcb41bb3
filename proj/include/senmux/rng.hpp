// Deterministic pseudo-random source: pcg32 seeded through SplitMix64.
//
// Every stochastic piece of the simulator draws from an Rng owned by the
// component, so a run is a pure function of its seed.  Substreams derive
// from the original seed (not the evolving state), which keeps one stream's
// consumption from perturbing another.
#pragma once

#include <cstdint>

namespace senmux {

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    // pcg32 output: 32 uniform bits.
    std::uint32_t next_u32();

    // Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01();

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller.  Both uniforms are consumed on every
    // call and the second variate is discarded, so the draw sequence does
    // not depend on call parity.
    double gauss();

    bool chance(double p);

    // Independent generator derived from this generator's seed and a key.
    Rng substream(std::uint64_t key) const;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    std::uint64_t inc_;
};

} // namespace senmux
