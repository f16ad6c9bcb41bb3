#include "senmux/rng.hpp"

#include <cmath>
#include <numbers>

namespace senmux {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {
constexpr std::uint64_t kPcgMult = 6364136223846793005ULL;
// Fixed stream selector; seeding follows the canonical pcg32 srandom flow.
constexpr std::uint64_t kPcgSeq = 0xda3e39cb94b95bdbULL;
} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    state_ = 0;
    inc_ = (kPcgSeq << 1u) | 1u;
    next_u32();
    state_ += splitmix64(seed);
    next_u32();
}

std::uint32_t Rng::next_u32() {
    std::uint64_t old = state_;
    state_ = old * kPcgMult + inc_;
    auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

double Rng::uniform01() {
    std::uint64_t hi = next_u32() >> 5;  // 27 bits
    std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>(hi * 67108864.0 + static_cast<double>(lo)) /
           9007199254740992.0; // 2^53
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0)
        return 0;
    // Rejection-free scaling via 53-bit uniform is fine for the small ranges
    // used here (trial counts, phase offsets).
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
}

double Rng::gauss() {
    double u1 = 1.0 - uniform01(); // (0, 1], keeps log() finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::chance(double p) {
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return uniform01() < p;
}

Rng Rng::substream(std::uint64_t key) const {
    return Rng(splitmix64(seed_ ^ splitmix64(key)));
}

} // namespace senmux
