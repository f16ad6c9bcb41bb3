// Request resolution: how a raw period request is classified against a
// sensor's supported range, which base period the HAL settles on, and the
// band of delivery gaps the stack guarantees for that request.
#pragma once

#include "senmux/sensor_types.hpp"

#include <cstdint>

namespace senmux {

// Hard floor on any delivery period; requests faster than this are capped
// (roughly an 1.1 kHz ceiling).
constexpr std::uint64_t kRateCapPeriodUs = 909;

enum class RequestClass { TooFast, InRange, TooSlow };

std::string to_string(RequestClass c);

// Closed interval of acceptable delivery gaps, in microseconds.
struct Band {
    std::uint64_t lo_us = 0;
    std::uint64_t hi_us = 0;
    bool contains(std::uint64_t gap_us) const { return gap_us >= lo_us && gap_us <= hi_us; }
};

RequestClass classify_request(const SensorSpec& spec, std::uint64_t request_us);

// Base period after range clamping and the HAL response model.
std::uint64_t clamp_request(const SensorSpec& spec, std::uint64_t request_us);

// Tight band around a known delivery period: [ceil(b/1.1), floor(b/0.9)].
Band band_for_base(std::uint64_t base_us);

// Guaranteed gap band for an arbitrary request.  In-range requests admit
// oversampling down to request/2.2 (step-grid HALs may run faster than
// asked); out-of-range requests get the tight band around the range edge.
// Single-frequency sensors always deliver the tight band around their one
// period.
Band band_for_request(const SensorSpec& spec, std::uint64_t request_us);

struct ResolvedRequest {
    std::uint64_t base_us = 0;
    Band band;
    RequestClass cls = RequestClass::InRange;
};

// Full resolution of a raw period request.
ResolvedRequest resolve_request(const SensorSpec& spec, std::uint64_t request_us);

// Resolution of an SDK preset.  If the profile carries a measured period
// for the preset, that period is used verbatim (chasing `behaves_as`
// redirects first) with the tight band around it; otherwise the preset's
// nominal period goes through ordinary request resolution.
ResolvedRequest resolve_sdk(const SensorSpec& spec, SdkRate rate);

} // namespace senmux
