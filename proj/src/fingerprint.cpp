#include "senmux/fingerprint.hpp"

#include "senmux/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace senmux {

bool rate_distinguishable(const DeviceProfile& profile, Sensor sensor, SdkRate rate,
                          double epsilon) {
    if (!profile.supports(sensor))
        return false;
    const SensorSpec& spec = profile.spec(sensor);
    // A single-frequency responder delivers its fixed period no matter what
    // was asked, so the observed rate carries no information about the
    // request.
    if (spec.response.kind == ResponseModel::Kind::SingleFrequency)
        return false;
    // A preset the HAL silently redirects is indistinguishable from its
    // target, so it cannot be attributed.
    auto it = spec.sdk_periods.find(rate);
    if (it != spec.sdk_periods.end() && it->second.behaves_as)
        return false;
    std::uint64_t base = resolve_sdk(spec, rate).base_us;
    std::uint64_t carrier = spec.max_period_us;
    return static_cast<double>(base) < static_cast<double>(carrier) * (1.0 - epsilon);
}

Observer::Observer(SensorStack& stack, ObserverOptions options)
    : stack_(stack), options_(std::move(options)) {
    if (stack_.policy() != MuxPolicy::MaxFrequency)
        throw std::invalid_argument(
            "observer needs a shared-fastest stack; other policies isolate its stream");
    if (options_.confirm < 1)
        throw std::invalid_argument("confirm must be at least 1");
    for (const SensorSpec& spec : stack_.sensor_list()) {
        Sensor sensor = spec.sensor;
        // Registering on a coupled virtual sensor would itself drive the
        // base sensor's shared stream, polluting that watch; activity on the
        // virtual sensor is visible through the base sensor instead.
        if (spec.couples_to)
            continue;
        handles_.push_back(stack_.register_listener(
            options_.app_id, sensor, spec.max_period_us,
            [this](const SensorEvent& ev) { on_event(ev); }));
        // Registering pinned the stream at the carrier (or found it already
        // faster), so the watch starts armed rather than waiting for a
        // carrier confirmation that jitter or drops could delay.  The
        // carrier is the observer's own resolved request, not the current
        // stream period, which another listener may already hold lower.
        Watch watch;
        watch.carrier_us = resolve_request(spec, spec.max_period_us).base_us;
        for (SdkRate rate : kAllSdkRates) {
            if (!rate_distinguishable(stack_.profile(), sensor, rate, options_.epsilon))
                continue;
            std::uint64_t period = resolve_sdk(spec, rate).base_us;
            watch.constants.push_back({rate, period, band_for_base(period)});
        }
        watches_.emplace(sensor, std::move(watch));
    }
}

Observer::~Observer() {
    for (const ListenerHandle& h : handles_) {
        try {
            stack_.unregister_listener(h);
        } catch (...) {
            // stack may already have been torn down
        }
    }
}

void Observer::on_event(const SensorEvent& ev) {
    auto it = watches_.find(ev.sensor);
    if (it == watches_.end())
        return;
    Watch& watch = it->second;
    if (watch.prev)
        feed(watch, ev.sensor, span_us(*watch.prev, ev.timestamp), ev.timestamp);
    watch.prev = ev.timestamp;
}

void Observer::feed(Watch& watch, Sensor sensor, std::uint64_t gap_us, SimTime close) {
    const double eps = options_.epsilon;
    double gap = static_cast<double>(gap_us);
    bool at_carrier = within_band(gap, static_cast<double>(watch.carrier_us), eps);

    if (!watch.armed) {
        if (at_carrier) {
            if (++watch.carrier_run >= options_.confirm) {
                watch.armed = true;
                watch.run.clear();
            }
        } else {
            watch.carrier_run = 0;
        }
        return;
    }

    // Carrier-band gaps and anything slower (dropped-event doublings of the
    // carrier) are not departures; they just invalidate any candidate run.
    if (at_carrier || gap >= static_cast<double>(watch.carrier_us) * (1.0 - eps)) {
        watch.run.clear();
        return;
    }

    if (!watch.run.empty()) {
        double prev = static_cast<double>(watch.run.back());
        if (std::abs(gap - prev) > eps * prev)
            watch.run.clear();
    }
    if (watch.run.empty())
        watch.run_first_close = close;
    watch.run.push_back(gap_us);
    if (static_cast<int>(watch.run.size()) >= options_.confirm)
        emit(watch, sensor);
}

void Observer::emit(Watch& watch, Sensor sensor) {
    // The first gap of a departure run straddles the reconfiguration and
    // carries residual phase from the old period, so the period estimate
    // uses the later gaps whenever there are any.
    std::vector<std::uint64_t> clean(watch.run.begin() + (watch.run.size() > 1 ? 1 : 0),
                                     watch.run.end());
    std::uint64_t period = median_gap_us(clean);

    DetectionEvent event;
    event.sensor = sensor;
    event.period_us = period;
    event.at = watch.run_first_close;
    const Constant* best = nullptr;
    for (const Constant& c : watch.constants) {
        if (!c.band.contains(period))
            continue;
        if (!best || std::llabs(static_cast<long long>(period) -
                                static_cast<long long>(c.period_us)) <
                         std::llabs(static_cast<long long>(period) -
                                    static_cast<long long>(best->period_us)))
            best = &c;
    }
    if (best)
        event.constant = best->rate;
    detections_.push_back(event);

    // Stay quiet until the stream is seen back at the carrier rate, so one
    // foreground registration yields exactly one event.
    watch.armed = false;
    watch.carrier_run = 0;
    watch.run.clear();
}

ScenarioResult run_scenario(const DeviceProfile& profile, const ScenarioConfig& config) {
    Engine engine;
    SensorStack::Options options;
    options.policy = MuxPolicy::MaxFrequency;
    SensorStack stack(engine, profile, options, config.seed);
    Observer observer(stack, {config.confirm, config.epsilon, "observer"});

    std::uint64_t max_carrier = 0;
    for (const SensorSpec& spec : stack.sensor_list()) {
        if (spec.couples_to)
            continue; // unwatched by the observer, so no stream to warm up
        max_carrier = std::max(max_carrier, stack.effective_period(spec.sensor));
    }

    // Warm up long enough for every watch to arm, then register at a random
    // phase inside a carrier gap.
    Rng rng = Rng(config.seed).substream(0x7363656e6172696fULL);
    SimTime t_reg = advance(SimTime{0}, 3 * max_carrier + rng.below(max_carrier));
    engine.run_until(t_reg);
    observer.clear();

    ScenarioResult result;
    result.registered_at = engine.now();

    std::vector<ListenerHandle> victims;
    victims.reserve(config.combo.size());
    for (const VictimAction& action : config.combo) {
        if (action.rate)
            victims.push_back(stack.register_listener_sdk("victim", action.sensor, *action.rate));
        else
            victims.push_back(
                stack.register_listener("victim", action.sensor, action.period_us));
    }
    engine.run_until(advance(t_reg, config.dwell_us));
    for (const ListenerHandle& h : victims)
        stack.unregister_listener(h);

    result.detections = observer.detections();
    return result;
}

} // namespace senmux
