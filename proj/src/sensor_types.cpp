#include "senmux/sensor_types.hpp"

#include <algorithm>

namespace senmux {

std::string to_string(Sensor s) {
    switch (s) {
    case Sensor::AC: return "accelerometer";
    case Sensor::GR: return "gravity";
    case Sensor::GY: return "gyroscope";
    case Sensor::LA: return "linear_acceleration";
    case Sensor::MF: return "magnetic_field";
    case Sensor::RV: return "rotation_vector";
    }
    return "unknown";
}

std::optional<Sensor> sensor_from_string(const std::string& name) {
    for (Sensor s : kAllSensors) {
        if (to_string(s) == name)
            return s;
    }
    // Short aliases for CLI convenience.
    if (name == "ac") return Sensor::AC;
    if (name == "gr") return Sensor::GR;
    if (name == "gy") return Sensor::GY;
    if (name == "la") return Sensor::LA;
    if (name == "mf") return Sensor::MF;
    if (name == "rv") return Sensor::RV;
    return std::nullopt;
}

std::string to_string(SdkRate r) {
    switch (r) {
    case SdkRate::Fastest: return "fastest";
    case SdkRate::Game: return "game";
    case SdkRate::Ui: return "ui";
    case SdkRate::Normal: return "normal";
    }
    return "unknown";
}

std::optional<SdkRate> sdk_rate_from_string(const std::string& name) {
    for (SdkRate r : kAllSdkRates) {
        if (to_string(r) == name)
            return r;
    }
    return std::nullopt;
}

std::string to_string(MuxPolicy p) {
    switch (p) {
    case MuxPolicy::MaxFrequency: return "max_frequency";
    case MuxPolicy::PerAppEnforced: return "per_app_enforced";
    case MuxPolicy::QuantizedRates: return "quantized_rates";
    }
    return "unknown";
}

std::optional<MuxPolicy> policy_from_string(const std::string& name) {
    for (MuxPolicy p :
         {MuxPolicy::MaxFrequency, MuxPolicy::PerAppEnforced, MuxPolicy::QuantizedRates}) {
        if (to_string(p) == name)
            return p;
    }
    return std::nullopt;
}

bool DeviceProfile::supports(Sensor s) const {
    auto it = sensors.find(s);
    return it != sensors.end() && it->second.supported;
}

const SensorSpec& DeviceProfile::spec(Sensor s) const {
    auto it = sensors.find(s);
    if (it == sensors.end() || !it->second.supported)
        throw UnsupportedSensorError("sensor " + to_string(s) + " not supported by profile " +
                                     name);
    return it->second;
}

std::vector<Sensor> DeviceProfile::sensor_list() const {
    std::vector<Sensor> out;
    for (Sensor s : kAllSensors) {
        if (supports(s))
            out.push_back(s);
    }
    return out;
}

std::uint64_t nominal_sdk_period_us(const SensorSpec& spec, SdkRate r) {
    switch (r) {
    case SdkRate::Fastest: return spec.min_period_us;
    case SdkRate::Game: return 20000;
    case SdkRate::Ui: return 60000;
    case SdkRate::Normal: return 200000;
    }
    return spec.max_period_us;
}

} // namespace senmux
