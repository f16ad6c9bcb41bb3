// Integer-microsecond simulation clock with overflow-checked arithmetic.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace senmux {

// Thrown when a time computation would wrap around instead of failing loudly.
class TimeOverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// A point on the simulation timeline, in whole microseconds since t=0.
struct SimTime {
    std::uint64_t us = 0;

    friend constexpr bool operator==(SimTime a, SimTime b) { return a.us == b.us; }
    friend constexpr bool operator!=(SimTime a, SimTime b) { return a.us != b.us; }
    friend constexpr bool operator<(SimTime a, SimTime b) { return a.us < b.us; }
    friend constexpr bool operator<=(SimTime a, SimTime b) { return a.us <= b.us; }
    friend constexpr bool operator>(SimTime a, SimTime b) { return a.us > b.us; }
    friend constexpr bool operator>=(SimTime a, SimTime b) { return a.us >= b.us; }
};

// t + delta_us, refusing to wrap.
inline SimTime advance(SimTime t, std::uint64_t delta_us) {
    if (t.us > std::numeric_limits<std::uint64_t>::max() - delta_us)
        throw TimeOverflowError("simulation time overflow");
    return SimTime{t.us + delta_us};
}

// Elapsed microseconds from `from` to `to`; `to` must not precede `from`.
inline std::uint64_t span_us(SimTime from, SimTime to) {
    if (to.us < from.us)
        throw TimeOverflowError("negative time span");
    return to.us - from.us;
}

inline double to_seconds(std::uint64_t us) { return static_cast<double>(us) * 1e-6; }

} // namespace senmux
