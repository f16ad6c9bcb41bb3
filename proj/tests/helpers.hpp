// Shared test fixtures: synthetic device profiles with controllable noise
// and a callback that records delivered events.
#pragma once

#include "senmux/stack.hpp"

#include <cstdint>
#include <vector>

inline senmux::SensorSpec basic_spec(senmux::Sensor s, std::uint64_t min_us,
                                     std::uint64_t max_us, double sigma = 0.0,
                                     double drop = 0.0) {
    senmux::SensorSpec spec;
    spec.sensor = s;
    spec.supported = true;
    spec.vendor = "bench";
    spec.min_period_us = min_us;
    spec.max_period_us = max_us;
    spec.jitter.relative_sigma = sigma;
    spec.jitter.drop_base = drop;
    spec.jitter.drop_freq_coeff = 0.0;
    return spec;
}

// Two plain sensors, no jitter, no drops: every gap is exact.
inline senmux::DeviceProfile noiseless_profile() {
    senmux::DeviceProfile p;
    p.name = "bench";
    p.sensors[senmux::Sensor::AC] = basic_spec(senmux::Sensor::AC, 2'500, 1'000'000);
    p.sensors[senmux::Sensor::GY] = basic_spec(senmux::Sensor::GY, 2'500, 1'000'000);
    return p;
}

struct Capture {
    std::vector<senmux::SensorEvent> events;

    senmux::SensorStack::EventCallback cb() {
        return [this](const senmux::SensorEvent& e) { events.push_back(e); };
    }

    std::vector<std::uint64_t> gaps() const {
        std::vector<std::uint64_t> out;
        for (std::size_t i = 1; i < events.size(); ++i)
            out.push_back(senmux::span_us(events[i - 1].timestamp, events[i].timestamp));
        return out;
    }
};
