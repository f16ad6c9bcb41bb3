// Core vocabulary for the simulated sensor stack: sensor identifiers, rate
// requests, per-device sensor descriptions, and the event record delivered
// to listeners.
#pragma once

#include "senmux/sim_time.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace senmux {

// The six continuous sensors the stack exposes.
enum class Sensor { AC, GR, GY, LA, MF, RV };

constexpr std::array<Sensor, 6> kAllSensors{Sensor::AC, Sensor::GR, Sensor::GY,
                                            Sensor::LA, Sensor::MF, Sensor::RV};

std::string to_string(Sensor s);
std::optional<Sensor> sensor_from_string(const std::string& name);

// SDK-style rate presets.  Nominal request periods: FASTEST polls as fast as
// the sensor goes, GAME = 20 ms, UI = 60 ms, NORMAL = 200 ms.
enum class SdkRate { Fastest, Game, Ui, Normal };

constexpr std::array<SdkRate, 4> kAllSdkRates{SdkRate::Fastest, SdkRate::Game,
                                              SdkRate::Ui, SdkRate::Normal};

std::string to_string(SdkRate r);
std::optional<SdkRate> sdk_rate_from_string(const std::string& name);

// How the stack arbitrates between listeners that want different rates.
//  MaxFrequency   - everyone receives the fastest requested stream (the
//                   behaviour under study).
//  PerAppEnforced - each listener gets its own stream at its own rate.
//  QuantizedRates - requests snap to a short list of allowed periods.
enum class MuxPolicy { MaxFrequency, PerAppEnforced, QuantizedRates };

std::string to_string(MuxPolicy p);
std::optional<MuxPolicy> policy_from_string(const std::string& name);

// Timing noise model: multiplicative gaussian jitter on each gap plus an
// independent per-event drop probability that grows linearly with rate.
struct JitterModel {
    double relative_sigma = 0.0;
    double drop_base = 0.0;
    double drop_freq_coeff = 1e-5; // added drop probability per Hz
};

// How a sensor's HAL shapes an arbitrary period request.
//  Accurate        - returns the request (after min/max clamping).
//  StepOversample  - snaps to the largest grid period <= the clamped
//                    request, i.e. samples somewhat faster than asked.
//  SingleFrequency - ignores the request and always runs at one period.
struct ResponseModel {
    enum class Kind { Accurate, StepOversample, SingleFrequency };
    Kind kind = Kind::Accurate;
    std::vector<std::uint64_t> grid_us; // StepOversample: ascending periods
    std::uint64_t fixed_period_us = 0;  // SingleFrequency
};

// Measured behaviour of one SDK preset on one device sensor: the period the
// device actually delivers and - for buggy HALs - the preset the request
// actually behaves like.
struct SdkEntry {
    std::uint64_t period_us = 0;
    std::optional<SdkRate> behaves_as;
};

struct SensorSpec {
    Sensor sensor = Sensor::AC;
    bool supported = true;
    std::string vendor;
    std::uint64_t min_period_us = 0; // fastest supported
    std::uint64_t max_period_us = 0; // slowest supported
    ResponseModel response;
    JitterModel jitter;
    std::map<SdkRate, SdkEntry> sdk_periods;
    // Virtual sensor coupling: registrations on this sensor also drive the
    // named base sensor (disabled unless set in the profile).
    std::optional<Sensor> couples_to;
};

struct DeviceProfile {
    int schema_version = 1;
    std::string name;
    std::map<Sensor, SensorSpec> sensors;

    bool supports(Sensor s) const;
    const SensorSpec& spec(Sensor s) const; // throws UnsupportedSensorError
    std::vector<Sensor> sensor_list() const; // supported, in enum order
};

// One delivered sample.  Timing is the only observable: payload values are
// not modelled.  `seq` counts generated events (pre-drop), so gaps in the
// received sequence correspond exactly to dropped events.
struct SensorEvent {
    Sensor sensor = Sensor::AC;
    SimTime timestamp{};
    std::uint64_t seq = 0;
};

// Identifies one active registration on a stack.
struct ListenerHandle {
    std::uint64_t id = 0;
    std::string app_id;
    Sensor sensor = Sensor::AC;
    std::uint64_t requested_period_us = 0; // nominal period for SDK requests
    std::optional<SdkRate> sdk_rate;
    SimTime registered_at{};
};

// Stack errors.
class UnsupportedSensorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class DuplicateHandleError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};
class UnknownHandleError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};
class NoListenersError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};
class ProfileSchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Nominal period for an SDK preset on a given sensor (before any device
// quirks): FASTEST maps to the sensor's min period.
std::uint64_t nominal_sdk_period_us(const SensorSpec& spec, SdkRate r);

} // namespace senmux
