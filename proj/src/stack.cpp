#include "senmux/stack.hpp"

#include <algorithm>
#include <cmath>

namespace senmux {

std::uint64_t jittered_gap(std::uint64_t base_us, const Band& band, double relative_sigma,
                           Rng& rng) {
    std::uint64_t gap = base_us;
    if (relative_sigma > 0.0) {
        double scaled = static_cast<double>(base_us) * (1.0 + relative_sigma * rng.gauss());
        gap = scaled <= 1.0 ? 1 : static_cast<std::uint64_t>(std::llround(scaled));
    }
    gap = std::clamp(gap, band.lo_us, band.hi_us);
    return std::max<std::uint64_t>(gap, 1);
}

double drop_probability(const JitterModel& jm, std::uint64_t base_us) {
    double freq_hz = 1e6 / static_cast<double>(base_us);
    return std::clamp(jm.drop_base + jm.drop_freq_coeff * freq_hz, 0.0, 1.0);
}

SensorStack::SensorStack(Engine& engine, DeviceProfile profile, Options options,
                         std::uint64_t seed)
    : engine_(engine), profile_(std::move(profile)), options_(std::move(options)), rng_(seed) {
    if (options_.policy == MuxPolicy::QuantizedRates) {
        const auto& allowed = options_.allowed_periods_us;
        if (allowed.empty() || !std::is_sorted(allowed.begin(), allowed.end()) ||
            allowed.front() < 1)
            throw std::invalid_argument("QuantizedRates needs an ascending non-empty period list");
    }
}

SensorStack::~SensorStack() {
    for (auto& [s, st] : shared_streams_)
        if (st.pending)
            engine_.cancel(st.pending);
    for (auto& [id, st] : app_streams_)
        if (st.pending)
            engine_.cancel(st.pending);
}

ListenerHandle SensorStack::register_listener(const std::string& app_id, Sensor sensor,
                                              std::uint64_t requested_period_us,
                                              EventCallback callback) {
    return add_listener(app_id, sensor, requested_period_us, std::nullopt, std::move(callback),
                        false);
}

ListenerHandle SensorStack::register_listener_sdk(const std::string& app_id, Sensor sensor,
                                                  SdkRate rate, EventCallback callback) {
    return add_listener(app_id, sensor, 0, rate, std::move(callback), false);
}

ListenerHandle SensorStack::add_listener(const std::string& app_id, Sensor sensor,
                                         std::uint64_t requested_period_us,
                                         std::optional<SdkRate> rate, EventCallback callback,
                                         bool internal) {
    const SensorSpec& spec = profile_.spec(sensor);
    std::uint64_t nominal = rate ? nominal_sdk_period_us(spec, *rate) : requested_period_us;
    if (!internal) {
        for (const auto& [id, l] : listeners_) {
            if (!l.internal && l.app_id == app_id && l.sensor == sensor)
                throw DuplicateHandleError("app '" + app_id + "' already registered on " +
                                           to_string(sensor));
        }
    }

    Listener l;
    l.id = next_listener_id_++;
    l.app_id = app_id;
    l.sensor = sensor;
    l.resolution = rate ? resolve_sdk(spec, *rate) : resolve_request(spec, nominal);
    l.callback = std::move(callback);
    l.internal = internal;
    // A virtual sensor drives its base sensor too (profile opt-in).
    if (spec.couples_to && !internal) {
        ListenerHandle coupled = rate ? add_listener(app_id, *spec.couples_to, 0, rate, {}, true)
                                      : add_listener(app_id, *spec.couples_to,
                                                     requested_period_us, std::nullopt, {}, true);
        l.coupled_listener = coupled.id;
    }
    std::uint64_t id = l.id;
    listeners_.emplace(id, std::move(l));

    if (options_.policy == MuxPolicy::PerAppEnforced) {
        auto [it, inserted] = app_streams_.emplace(id, make_stream(sensor, id));
        const Listener& stored = listeners_.at(id);
        restart_stream(it->second, stored.resolution.base_us, stored.resolution.band);
    } else {
        reconfigure_shared(sensor);
    }

    ListenerHandle handle;
    handle.id = id;
    handle.app_id = app_id;
    handle.sensor = sensor;
    handle.requested_period_us = nominal;
    handle.sdk_rate = rate;
    handle.registered_at = engine_.now();
    return handle;
}

void SensorStack::unregister_listener(const ListenerHandle& handle) {
    if (listeners_.find(handle.id) == listeners_.end())
        throw UnknownHandleError("handle is not an active registration");
    remove_listener(handle.id);
}

void SensorStack::remove_listener(std::uint64_t id) {
    auto it = listeners_.find(id);
    if (it == listeners_.end())
        return;
    Sensor sensor = it->second.sensor;
    std::uint64_t coupled = it->second.coupled_listener;
    listeners_.erase(it);

    auto st = app_streams_.find(id);
    if (st != app_streams_.end()) {
        if (st->second.pending)
            engine_.cancel(st->second.pending);
        app_streams_.erase(st);
    }
    if (options_.policy != MuxPolicy::PerAppEnforced)
        reconfigure_shared(sensor);
    if (coupled)
        remove_listener(coupled);
}

void SensorStack::reconfigure_shared(Sensor sensor) {
    const Listener* winner = nullptr;
    for (const auto& [id, l] : listeners_) {
        if (l.sensor != sensor)
            continue;
        if (!winner || l.resolution.base_us < winner->resolution.base_us)
            winner = &l;
    }
    auto it = shared_streams_.find(sensor);
    if (!winner) {
        if (it != shared_streams_.end()) {
            if (it->second.pending)
                engine_.cancel(it->second.pending);
            shared_streams_.erase(it);
        }
        return;
    }
    std::uint64_t base = winner->resolution.base_us;
    Band band = winner->resolution.band;
    if (options_.policy == MuxPolicy::QuantizedRates) {
        base = quantize(base);
        band = band_for_base(base);
    }
    if (it == shared_streams_.end()) {
        it = shared_streams_.emplace(sensor, make_stream(sensor, 0)).first;
    } else if (it->second.base_us == base && it->second.band.lo_us == band.lo_us &&
               it->second.band.hi_us == band.hi_us) {
        return; // nothing changed; the running stream keeps its phase
    }
    restart_stream(it->second, base, band);
}

SensorStack::Stream SensorStack::make_stream(Sensor sensor, std::uint64_t owner) {
    Stream st;
    st.sensor = sensor;
    st.owner = owner;
    st.sigma = profile_.spec(sensor).jitter.relative_sigma;
    st.rng = rng_.substream(next_stream_key_++);
    return st;
}

void SensorStack::restart_stream(Stream& stream, std::uint64_t base_us, const Band& band) {
    stream.base_us = base_us;
    stream.band = band;
    stream.drop_p = drop_probability(profile_.spec(stream.sensor).jitter, base_us);
    if (stream.pending) {
        engine_.cancel(stream.pending);
        stream.pending = 0;
    }
    schedule_next(stream);
}

void SensorStack::schedule_next(Stream& stream) {
    std::uint64_t gap = jittered_gap(stream.base_us, stream.band, stream.sigma, stream.rng);
    if (gap_probe_)
        gap_probe_(stream.sensor, gap);
    Sensor sensor = stream.sensor;
    std::uint64_t owner = stream.owner;
    stream.pending = engine_.schedule(advance(engine_.now(), gap),
                                      [this, sensor, owner] { fire(sensor, owner); });
}

void SensorStack::fire(Sensor sensor, std::uint64_t owner) {
    Stream* stream = nullptr;
    if (owner != 0) {
        auto it = app_streams_.find(owner);
        if (it == app_streams_.end())
            return;
        stream = &it->second;
    } else {
        auto it = shared_streams_.find(sensor);
        if (it == shared_streams_.end())
            return;
        stream = &it->second;
    }
    stream->pending = 0;
    stream->seq += 1;
    bool dropped = stream->rng.chance(stream->drop_p);
    SensorEvent event{sensor, engine_.now(), stream->seq};
    schedule_next(*stream);
    if (dropped)
        return;

    // Deliver in registration order; callbacks may (un)register listeners,
    // so work from an id snapshot and re-check each.
    std::vector<std::uint64_t> ids;
    if (owner != 0) {
        ids.push_back(owner);
    } else {
        for (const auto& [id, l] : listeners_)
            if (l.sensor == sensor)
                ids.push_back(id);
    }
    for (std::uint64_t id : ids) {
        auto it = listeners_.find(id);
        if (it == listeners_.end() || !it->second.callback)
            continue;
        it->second.callback(event);
    }
}

std::uint64_t SensorStack::quantize(std::uint64_t base_us) const {
    for (std::uint64_t p : options_.allowed_periods_us)
        if (p >= base_us)
            return p;
    return options_.allowed_periods_us.back();
}

const SensorStack::Stream* SensorStack::stream_for(Sensor sensor, std::uint64_t owner) const {
    if (owner != 0) {
        auto it = app_streams_.find(owner);
        return it == app_streams_.end() ? nullptr : &it->second;
    }
    auto it = shared_streams_.find(sensor);
    return it == shared_streams_.end() ? nullptr : &it->second;
}

std::uint64_t SensorStack::effective_period(Sensor sensor) const {
    profile_.spec(sensor); // unsupported sensors reject the query
    if (options_.policy == MuxPolicy::PerAppEnforced) {
        const Stream* best = nullptr;
        for (const auto& [id, st] : app_streams_) {
            if (st.sensor == sensor && (!best || st.base_us < best->base_us))
                best = &st;
        }
        if (!best)
            throw NoListenersError("no active listeners on " + to_string(sensor));
        return best->base_us;
    }
    const Stream* st = stream_for(sensor, 0);
    if (!st)
        throw NoListenersError("no active listeners on " + to_string(sensor));
    return st->base_us;
}

std::uint64_t SensorStack::listener_period(const ListenerHandle& handle) const {
    auto it = listeners_.find(handle.id);
    if (it == listeners_.end())
        throw UnknownHandleError("handle is not an active registration");
    const Stream* st = options_.policy == MuxPolicy::PerAppEnforced
                           ? stream_for(it->second.sensor, handle.id)
                           : stream_for(it->second.sensor, 0);
    if (!st)
        throw NoListenersError("listener has no backing stream");
    return st->base_us;
}

std::vector<SensorSpec> SensorStack::sensor_list() const {
    std::vector<SensorSpec> out;
    for (Sensor s : profile_.sensor_list())
        out.push_back(profile_.spec(s));
    return out;
}

} // namespace senmux
