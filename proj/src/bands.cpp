#include "senmux/bands.hpp"

#include <algorithm>

namespace senmux {

namespace {

// ceil(x / 1.1) and floor(x / 0.9) in exact integer arithmetic.
std::uint64_t div_1p1_ceil(std::uint64_t x) { return (x * 10 + 10) / 11; }
std::uint64_t div_0p9_floor(std::uint64_t x) { return x * 10 / 9; }
// ceil(x / 2.2)
std::uint64_t div_2p2_ceil(std::uint64_t x) { return (x * 5 + 10) / 11; }

} // namespace

std::string to_string(RequestClass c) {
    switch (c) {
    case RequestClass::TooFast: return "too_fast";
    case RequestClass::InRange: return "in_range";
    case RequestClass::TooSlow: return "too_slow";
    }
    return "unknown";
}

RequestClass classify_request(const SensorSpec& spec, std::uint64_t request_us) {
    if (request_us < spec.min_period_us)
        return RequestClass::TooFast;
    if (request_us > spec.max_period_us)
        return RequestClass::TooSlow;
    return RequestClass::InRange;
}

std::uint64_t clamp_request(const SensorSpec& spec, std::uint64_t request_us) {
    std::uint64_t base = request_us;
    switch (classify_request(spec, request_us)) {
    case RequestClass::TooFast:
        base = std::max(spec.min_period_us, kRateCapPeriodUs);
        break;
    case RequestClass::TooSlow:
        base = spec.max_period_us;
        break;
    case RequestClass::InRange:
        break;
    }
    switch (spec.response.kind) {
    case ResponseModel::Kind::Accurate:
        return base;
    case ResponseModel::Kind::StepOversample: {
        // Largest grid period not above the clamped request; if the grid
        // starts above it, the sensor runs at its fastest grid step.
        const auto& grid = spec.response.grid_us;
        std::uint64_t picked = grid.empty() ? base : grid.front();
        for (std::uint64_t g : grid) {
            if (g <= base)
                picked = g;
            else
                break;
        }
        return picked;
    }
    case ResponseModel::Kind::SingleFrequency:
        return spec.response.fixed_period_us;
    }
    return base;
}

Band band_for_base(std::uint64_t base_us) {
    return Band{div_1p1_ceil(base_us), div_0p9_floor(base_us)};
}

Band band_for_request(const SensorSpec& spec, std::uint64_t request_us) {
    if (spec.response.kind == ResponseModel::Kind::SingleFrequency)
        return band_for_base(spec.response.fixed_period_us);
    switch (classify_request(spec, request_us)) {
    case RequestClass::TooFast:
        return band_for_base(std::max(spec.min_period_us, kRateCapPeriodUs));
    case RequestClass::TooSlow:
        return band_for_base(spec.max_period_us);
    case RequestClass::InRange:
        return Band{div_2p2_ceil(request_us), div_0p9_floor(request_us)};
    }
    return band_for_base(request_us);
}

ResolvedRequest resolve_request(const SensorSpec& spec, std::uint64_t request_us) {
    ResolvedRequest r;
    r.cls = classify_request(spec, request_us);
    r.base_us = clamp_request(spec, request_us);
    r.band = band_for_request(spec, request_us);
    return r;
}

ResolvedRequest resolve_sdk(const SensorSpec& spec, SdkRate rate) {
    // Chase behaves_as redirects (bounded; profiles are validated against
    // cycles but stay safe regardless).
    SdkRate effective = rate;
    for (int hop = 0; hop < 4; ++hop) {
        auto it = spec.sdk_periods.find(effective);
        if (it == spec.sdk_periods.end())
            break;
        if (!it->second.behaves_as || *it->second.behaves_as == effective)
            break;
        effective = *it->second.behaves_as;
    }
    auto it = spec.sdk_periods.find(effective);
    if (it != spec.sdk_periods.end() && it->second.period_us > 0) {
        ResolvedRequest r;
        r.base_us = it->second.period_us;
        r.band = band_for_base(r.base_us);
        r.cls = classify_request(spec, r.base_us);
        return r;
    }
    return resolve_request(spec, nominal_sdk_period_us(spec, effective));
}

} // namespace senmux
