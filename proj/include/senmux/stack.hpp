// Simulated sensor stack: listeners register period requests per sensor,
// the configured multiplexing policy arbitrates between them, and events are
// generated on the simulation engine with per-sensor jitter and drops.
//
// Under MaxFrequency every listener on a sensor shares one delivery stream
// running at the fastest resolved request (the behaviour the attacks
// exploit).  Under PerAppEnforced each listener gets an isolated stream at
// its own rate.  Under QuantizedRates the shared stream snaps to the
// smallest allowed period not faster than the would-be shared rate.
//
// Rate changes restart the stream: the pending emission is cancelled and the
// next event is scheduled one full new-period gap after the change, which
// models HAL reconfiguration without leaking a stale-period event.
#pragma once

#include "senmux/bands.hpp"
#include "senmux/engine.hpp"
#include "senmux/rng.hpp"
#include "senmux/sensor_types.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace senmux {

// One generated inter-event gap, drawn from the stream's jitter model and
// truncated into the guaranteed band.  Exposed for tests and the jitter
// statistics command.
std::uint64_t jittered_gap(std::uint64_t base_us, const Band& band, double relative_sigma,
                           Rng& rng);

// Per-event drop probability at a given base period.
double drop_probability(const JitterModel& jm, std::uint64_t base_us);

class SensorStack {
public:
    using EventCallback = std::function<void(const SensorEvent&)>;
    // Observes every generated gap (pre-drop); used for jitter statistics.
    using GapProbe = std::function<void(Sensor, std::uint64_t gap_us)>;

    struct Options {
        MuxPolicy policy = MuxPolicy::MaxFrequency;
        // QuantizedRates: ascending list of permitted periods.
        std::vector<std::uint64_t> allowed_periods_us{20000, 60000, 200000};
    };

    SensorStack(Engine& engine, DeviceProfile profile, Options options, std::uint64_t seed);
    ~SensorStack();

    SensorStack(const SensorStack&) = delete;
    SensorStack& operator=(const SensorStack&) = delete;

    // Raw period request (microseconds).
    ListenerHandle register_listener(const std::string& app_id, Sensor sensor,
                                     std::uint64_t requested_period_us,
                                     EventCallback callback = {});
    // SDK preset request; resolves through the profile's measured preset
    // table when present, else through the preset's nominal period.
    ListenerHandle register_listener_sdk(const std::string& app_id, Sensor sensor, SdkRate rate,
                                         EventCallback callback = {});
    void unregister_listener(const ListenerHandle& handle);

    // Current delivery base period for a sensor's shared stream (fastest
    // stream on the sensor under PerAppEnforced).
    std::uint64_t effective_period(Sensor sensor) const;
    // Base period of the stream serving one listener.
    std::uint64_t listener_period(const ListenerHandle& handle) const;

    std::vector<SensorSpec> sensor_list() const;

    void set_gap_probe(GapProbe probe) { gap_probe_ = std::move(probe); }

    const DeviceProfile& profile() const { return profile_; }
    MuxPolicy policy() const { return options_.policy; }
    Engine& engine() { return engine_; }

private:
    struct Listener {
        std::uint64_t id = 0;
        std::string app_id;
        Sensor sensor = Sensor::AC;
        ResolvedRequest resolution;
        EventCallback callback;
        std::uint64_t coupled_listener = 0; // internal registration on a coupled sensor
        bool internal = false;
    };

    struct Stream {
        Sensor sensor = Sensor::AC;
        std::uint64_t base_us = 0;
        Band band;
        double sigma = 0.0;
        double drop_p = 0.0;
        std::uint64_t seq = 0;
        EventId pending = 0;
        Rng rng{0};
        std::uint64_t owner = 0; // listener id for per-app streams, 0 = shared
    };

    ListenerHandle add_listener(const std::string& app_id, Sensor sensor,
                                std::uint64_t requested_period_us, std::optional<SdkRate> rate,
                                EventCallback callback, bool internal);
    void remove_listener(std::uint64_t id);
    void reconfigure_shared(Sensor sensor);
    void restart_stream(Stream& stream, std::uint64_t base_us, const Band& band);
    void schedule_next(Stream& stream);
    void fire(Sensor sensor, std::uint64_t owner);
    std::uint64_t quantize(std::uint64_t base_us) const;
    Stream make_stream(Sensor sensor, std::uint64_t owner);
    const Stream* stream_for(Sensor sensor, std::uint64_t owner) const;

    Engine& engine_;
    DeviceProfile profile_;
    Options options_;
    Rng rng_;
    std::uint64_t next_listener_id_ = 1;
    std::uint64_t next_stream_key_ = 1;
    std::map<std::uint64_t, Listener> listeners_;   // id -> listener, insertion order
    std::map<Sensor, Stream> shared_streams_;       // MaxFrequency / QuantizedRates
    std::map<std::uint64_t, Stream> app_streams_;   // PerAppEnforced, keyed by listener
    GapProbe gap_probe_;
};

} // namespace senmux
