// Sampling-rate fingerprinting: a background observer registers the slowest
// possible request on every sensor and watches delivered timestamps.  Under
// a shared-fastest multiplexer, any faster registration by another app
// accelerates the observer's own stream, so inter-event gaps reveal the
// victim's requested rate without any sensor permission.
#pragma once

#include "senmux/bands.hpp"
#include "senmux/stack.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace senmux {

// True when a victim registration at this SDK preset produces a stream
// period an observer can tell apart from the sensor's slowest (carrier)
// period.  Excludes unsupported sensors, sensors that ignore the requested
// rate entirely (single-frequency responders), presets the HAL redirects to
// another preset, and periods too close to the carrier band.
bool rate_distinguishable(const DeviceProfile& profile, Sensor sensor, SdkRate rate,
                          double epsilon = 0.1);

// One recovered foreground registration.
struct DetectionEvent {
    Sensor sensor = Sensor::AC;
    // Matching SDK preset when the recovered period lands in a preset's
    // delivery band; empty for raw-period registrations.
    std::optional<SdkRate> constant;
    std::uint64_t period_us = 0; // recovered stream period
    SimTime at;                  // close of the first gap of the confirming run
};

struct ObserverOptions {
    int confirm = 2;      // consecutive agreeing gaps before a detection
    double epsilon = 0.1; // relative tolerance for band membership
    std::string app_id = "observer";
};

// Passive rate observer.  Requires a MaxFrequency stack: registers one
// slowest-period listener per supported sensor and reports a DetectionEvent
// whenever the shared stream leaves the carrier band and settles on a
// faster period.  Registering is what pins each stream at the carrier, so
// watches start armed; after a detection the sensor's watch stays quiet
// until the stream is seen back at the carrier rate.  Sensors that couple
// into another sensor are left unwatched, since registering on them would
// drive the base sensor's stream.
class Observer {
public:
    explicit Observer(SensorStack& stack, ObserverOptions options = {});
    ~Observer();

    Observer(const Observer&) = delete;
    Observer& operator=(const Observer&) = delete;

    const std::vector<DetectionEvent>& detections() const { return detections_; }
    void clear() { detections_.clear(); }

private:
    struct Constant {
        SdkRate rate = SdkRate::Fastest;
        std::uint64_t period_us = 0;
        Band band; // delivery band of period_us
    };

    struct Watch {
        std::uint64_t carrier_us = 0;
        std::vector<Constant> constants; // distinguishable presets, for labels
        std::optional<SimTime> prev;     // previous delivery timestamp
        bool armed = true;               // watching for departures; off after a detection
        int carrier_run = 0;
        std::vector<std::uint64_t> run;  // consecutive agreeing candidate gaps
        SimTime run_first_close;
    };

    void on_event(const SensorEvent& ev);
    void feed(Watch& watch, Sensor sensor, std::uint64_t gap_us, SimTime close);
    void emit(Watch& watch, Sensor sensor);

    SensorStack& stack_;
    ObserverOptions options_;
    std::vector<ListenerHandle> handles_;
    std::map<Sensor, Watch> watches_;
    std::vector<DetectionEvent> detections_;
};

// One foreground registration to replay: an SDK preset or a raw period.
struct VictimAction {
    Sensor sensor = Sensor::AC;
    std::optional<SdkRate> rate;
    std::uint64_t period_us = 0; // used when rate is empty
};

struct ScenarioConfig {
    std::vector<VictimAction> combo;
    std::uint64_t dwell_us = 5'000'000; // how long the victim stays registered
    std::uint64_t seed = 1;
    // Agreeing gaps per detection: 3 keeps the period estimate off
    // single-gap noise once the straddling first gap is discarded.
    int confirm = 3;
    double epsilon = 0.1;
};

struct ScenarioResult {
    SimTime registered_at;                  // when the victim combo registered
    std::vector<DetectionEvent> detections; // observer output during the dwell
};

// Runs one observer-vs-victim episode on a fresh MaxFrequency stack: the
// observer arms on the carrier rates, the victim registers every combo
// entry at a random phase after warm-up, dwells, then unregisters.
ScenarioResult run_scenario(const DeviceProfile& profile, const ScenarioConfig& config);

} // namespace senmux
