// Single-threaded discrete-event scheduler.
//
// Events fire in (time, insertion order): two events scheduled for the same
// microsecond run in the order they were scheduled, so a run is fully
// reproducible.  Callbacks may schedule or cancel further events, including
// more work at the current timestamp.
#pragma once

#include "senmux/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace senmux {

class SchedulingInPastError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

using EventId = std::uint64_t;

class Engine {
public:
    using Callback = std::function<void()>;

    SimTime now() const { return now_; }

    // Queue `fn` to run at `at` (>= now).  Returns a handle for cancel().
    EventId schedule(SimTime at, Callback fn);

    // Drop a pending event.  Returns false if it already fired or was
    // cancelled before.
    bool cancel(EventId id);

    // Fire every event with fire_at <= t, including events scheduled by the
    // callbacks themselves, then advance the clock to t.  Returns the number
    // of callbacks run.
    std::size_t run_until(SimTime t);

    std::size_t pending() const { return callbacks_.size(); }

private:
    struct Slot {
        SimTime at;
        std::uint64_t order;
        EventId id;
    };
    struct SlotLater {
        bool operator()(const Slot& a, const Slot& b) const {
            if (a.at != b.at)
                return b.at < a.at;
            return b.order < a.order; // FIFO among equal timestamps
        }
    };

    SimTime now_{};
    std::uint64_t next_order_ = 0;
    EventId next_id_ = 1;
    std::priority_queue<Slot, std::vector<Slot>, SlotLater> heap_;
    std::unordered_map<EventId, Callback> callbacks_;
};

} // namespace senmux
