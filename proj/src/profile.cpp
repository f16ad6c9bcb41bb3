#include "senmux/profile.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace senmux {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ProfileSchemaError(msg); }

std::uint64_t require_period(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number_unsigned())
        fail(ctx + ": missing or non-integer '" + key + "'");
    return j[key].get<std::uint64_t>();
}

ResponseModel parse_response(const json& j, const std::string& ctx) {
    ResponseModel r;
    if (j.is_null())
        return r;
    std::string kind = j.value("kind", "accurate");
    if (kind == "accurate") {
        r.kind = ResponseModel::Kind::Accurate;
    } else if (kind == "step_oversample") {
        r.kind = ResponseModel::Kind::StepOversample;
        if (!j.contains("grid_us") || !j["grid_us"].is_array() || j["grid_us"].empty())
            fail(ctx + ": step_oversample needs a non-empty 'grid_us' array");
        for (const auto& g : j["grid_us"])
            r.grid_us.push_back(g.get<std::uint64_t>());
    } else if (kind == "single_frequency") {
        r.kind = ResponseModel::Kind::SingleFrequency;
        r.fixed_period_us = require_period(j, "fixed_period_us", ctx);
    } else {
        fail(ctx + ": unknown response kind '" + kind + "'");
    }
    return r;
}

JitterModel parse_jitter(const json& j) {
    JitterModel m;
    if (j.is_null())
        return m;
    m.relative_sigma = j.value("relative_sigma", 0.0);
    m.drop_base = j.value("drop_base", 0.0);
    m.drop_freq_coeff = j.value("drop_freq_coeff", 0.0);
    return m;
}

SensorSpec parse_sensor(Sensor s, const json& j, const std::string& ctx) {
    SensorSpec spec;
    spec.sensor = s;
    spec.supported = j.value("supported", true);
    spec.vendor = j.value("vendor", "");
    spec.min_period_us = require_period(j, "min_period_us", ctx);
    spec.max_period_us = require_period(j, "max_period_us", ctx);
    spec.response = parse_response(j.contains("response") ? j["response"] : json(), ctx);
    spec.jitter = parse_jitter(j.contains("jitter") ? j["jitter"] : json());
    if (j.contains("sdk_periods")) {
        for (const auto& [key, entry] : j["sdk_periods"].items()) {
            auto rate = sdk_rate_from_string(key);
            if (!rate)
                fail(ctx + ": unknown SDK rate '" + key + "'");
            SdkEntry e;
            e.period_us = require_period(entry, "period_us", ctx + "." + key);
            if (entry.contains("behaves_as")) {
                auto target = sdk_rate_from_string(entry["behaves_as"].get<std::string>());
                if (!target)
                    fail(ctx + "." + key + ": unknown behaves_as target");
                e.behaves_as = *target;
            }
            spec.sdk_periods[*rate] = e;
        }
    }
    if (j.contains("couples_to")) {
        auto target = sensor_from_string(j["couples_to"].get<std::string>());
        if (!target)
            fail(ctx + ": unknown couples_to sensor");
        spec.couples_to = *target;
    }
    return spec;
}

} // namespace

DeviceProfile parse_profile(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("profile is not valid JSON: ") + e.what());
    }
    DeviceProfile p;
    p.schema_version = j.value("schema_version", 0);
    if (p.schema_version != 1)
        fail("unsupported profile schema_version");
    p.name = j.value("name", "");
    if (p.name.empty())
        fail("profile has no name");
    if (!j.contains("sensors") || !j["sensors"].is_object())
        fail("profile has no sensors object");
    for (const auto& [key, body] : j["sensors"].items()) {
        auto s = sensor_from_string(key);
        if (!s)
            fail("unknown sensor '" + key + "'");
        p.sensors[*s] = parse_sensor(*s, body, p.name + "." + key);
    }
    validate_profile(p);
    return p;
}

void validate_profile(const DeviceProfile& profile) {
    if (profile.sensor_list().empty())
        fail("profile " + profile.name + " supports no sensors");
    for (const auto& [s, spec] : profile.sensors) {
        if (!spec.supported)
            continue;
        const std::string ctx = profile.name + "." + to_string(s);
        if (spec.min_period_us < 1 || spec.min_period_us > spec.max_period_us)
            fail(ctx + ": period range is empty or zero");
        if (spec.max_period_us > 100'000'000)
            fail(ctx + ": max period above 100 s");
        const auto& jm = spec.jitter;
        if (jm.relative_sigma < 0.0 || jm.relative_sigma > 0.3)
            fail(ctx + ": relative_sigma outside [0, 0.3]");
        if (jm.drop_base < 0.0 || jm.drop_base >= 1.0 || jm.drop_freq_coeff < 0.0)
            fail(ctx + ": drop parameters out of range");
        if (spec.response.kind == ResponseModel::Kind::StepOversample) {
            const auto& g = spec.response.grid_us;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g[i] < 1 || (i > 0 && g[i] <= g[i - 1]))
                    fail(ctx + ": grid_us must be strictly ascending and positive");
            }
        }
        if (spec.response.kind == ResponseModel::Kind::SingleFrequency) {
            std::uint64_t f = spec.response.fixed_period_us;
            if (f < spec.min_period_us || f > spec.max_period_us)
                fail(ctx + ": fixed period outside supported range");
        }
        for (const auto& [rate, entry] : spec.sdk_periods) {
            const std::string ectx = ctx + "." + to_string(rate);
            // Measured preset periods are taken verbatim (real HALs deliver
            // rates slightly outside their advertised range), so only sanity
            // bounds apply here.
            if (entry.period_us < 1 || entry.period_us > 10'000'000)
                fail(ectx + ": implausible preset period");
            if (entry.behaves_as) {
                std::set<SdkRate> seen{rate};
                SdkRate cur = rate;
                while (true) {
                    auto it = spec.sdk_periods.find(cur);
                    if (it == spec.sdk_periods.end() || !it->second.behaves_as)
                        break;
                    cur = *it->second.behaves_as;
                    if (!seen.insert(cur).second)
                        fail(ectx + ": behaves_as chain is cyclic");
                }
            }
        }
        if (spec.couples_to) {
            if (*spec.couples_to == s || !profile.supports(*spec.couples_to))
                fail(ctx + ": couples_to must name another supported sensor");
        }
    }
}

DeviceProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail("cannot open profile file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_profile(buf.str());
}

std::string default_data_dir() { return SENMUX_DATA_DIR; }

DeviceProfile load_bundled_profile(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path bundled = fs::path(default_data_dir()) / "profiles" / (name + ".json");
    if (fs::exists(bundled))
        return load_profile_file(bundled.string());
    return load_profile_file(name);
}

} // namespace senmux
