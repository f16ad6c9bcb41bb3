#include "senmux/engine.hpp"

#include <utility>

namespace senmux {

EventId Engine::schedule(SimTime at, Callback fn) {
    if (at < now_)
        throw SchedulingInPastError("schedule() target precedes current time");
    EventId id = next_id_++;
    heap_.push(Slot{at, next_order_++, id});
    callbacks_.emplace(id, std::move(fn));
    return id;
}

bool Engine::cancel(EventId id) {
    // Lazy cancellation: the heap slot stays and is skipped when popped.
    return callbacks_.erase(id) > 0;
}

std::size_t Engine::run_until(SimTime t) {
    std::size_t fired = 0;
    while (!heap_.empty() && heap_.top().at <= t) {
        Slot slot = heap_.top();
        heap_.pop();
        auto it = callbacks_.find(slot.id);
        if (it == callbacks_.end())
            continue; // cancelled
        Callback fn = std::move(it->second);
        callbacks_.erase(it);
        now_ = slot.at;
        fn();
        ++fired;
    }
    if (t > now_)
        now_ = t;
    return fired;
}

} // namespace senmux
