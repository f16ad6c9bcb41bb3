#include "senmux/appdb.hpp"

#include "senmux/inference.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace senmux {

using json = nlohmann::json;

namespace {

bool periods_equal(std::uint64_t a, std::uint64_t b, double epsilon) {
    return within_band(static_cast<double>(a), static_cast<double>(b), epsilon) &&
           within_band(static_cast<double>(b), static_cast<double>(a), epsilon);
}

bool entries_equal(const ComboEntry& a, const ComboEntry& b, double epsilon) {
    if (a.sensor != b.sensor || a.constant.has_value() != b.constant.has_value())
        return false;
    if (a.constant)
        return *a.constant == *b.constant;
    return periods_equal(a.period_us, b.period_us, epsilon);
}

const ComboEntry* find_sensor(const std::vector<ComboEntry>& combo, Sensor sensor) {
    for (const ComboEntry& e : combo) {
        if (e.sensor == sensor)
            return &e;
    }
    return nullptr;
}

// True when the detection is consistent with the combo entry: preset labels
// must agree exactly, raw periods must land within epsilon of the record.
bool detection_matches(const DetectionEvent& d, const ComboEntry& e, double epsilon) {
    if (d.sensor != e.sensor || d.constant.has_value() != e.constant.has_value())
        return false;
    if (e.constant)
        return *d.constant == *e.constant;
    return within_band(static_cast<double>(d.period_us), static_cast<double>(e.period_us),
                       epsilon);
}

ComboEntry parse_entry(const json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("sensor"))
        throw SchemaViolationError(ctx + ": combo entry needs a sensor");
    ComboEntry e;
    auto sensor = sensor_from_string(j["sensor"].get<std::string>());
    if (!sensor)
        throw SchemaViolationError(ctx + ": unknown sensor '" +
                                   j["sensor"].get<std::string>() + "'");
    e.sensor = *sensor;
    bool has_rate = j.contains("rate");
    bool has_period = j.contains("period_us");
    if (has_rate == has_period)
        throw SchemaViolationError(ctx + ": combo entry needs exactly one of rate/period_us");
    if (has_rate) {
        auto rate = sdk_rate_from_string(j["rate"].get<std::string>());
        if (!rate)
            throw SchemaViolationError(ctx + ": unknown rate '" +
                                       j["rate"].get<std::string>() + "'");
        e.constant = *rate;
    } else {
        if (!j["period_us"].is_number_unsigned() || j["period_us"].get<std::uint64_t>() == 0)
            throw SchemaViolationError(ctx + ": period_us must be a positive integer");
        e.period_us = j["period_us"].get<std::uint64_t>();
    }
    return e;
}

} // namespace

bool combos_equal(const std::vector<ComboEntry>& a, const std::vector<ComboEntry>& b,
                  double epsilon) {
    if (a.size() != b.size())
        return false;
    for (const ComboEntry& ea : a) {
        const ComboEntry* eb = find_sensor(b, ea.sensor);
        if (!eb || !entries_equal(ea, *eb, epsilon))
            return false;
    }
    return true;
}

AppDb parse_app_db(const std::string& json_text, double epsilon) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("app database is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("apps") || !j["apps"].is_array())
        throw SchemaViolationError("app database needs an 'apps' array");

    AppDb db;
    db.schema_version = j.value("schema_version", 1);
    if (db.schema_version != 1)
        throw SchemaViolationError("unsupported app database schema_version");

    std::set<std::string> names;
    for (const json& app : j["apps"]) {
        if (!app.is_object() || !app.contains("name") || !app["name"].is_string())
            throw SchemaViolationError("every app record needs a string name");
        AppRecord rec;
        rec.name = app["name"].get<std::string>();
        if (rec.name.empty())
            throw SchemaViolationError("app name must not be empty");
        if (!names.insert(rec.name).second)
            throw SchemaViolationError("duplicate app name '" + rec.name + "'");
        rec.category = app.value("category", "");
        rec.unique_marked = app.value("unique", false);
        if (!app.contains("combo") || !app["combo"].is_array() || app["combo"].empty())
            throw SchemaViolationError("app '" + rec.name + "' needs a non-empty combo");
        std::set<Sensor> seen;
        for (const json& entry : app["combo"]) {
            ComboEntry e = parse_entry(entry, "app '" + rec.name + "'");
            if (!seen.insert(e.sensor).second)
                throw SchemaViolationError("app '" + rec.name +
                                           "' registers the same sensor twice");
            rec.combo.push_back(e);
        }
        db.records.push_back(std::move(rec));
    }

    for (std::size_t i = 0; i < db.records.size(); ++i) {
        bool shared = false;
        for (std::size_t k = 0; k < db.records.size() && !shared; ++k) {
            if (k != i && combos_equal(db.records[i].combo, db.records[k].combo, epsilon))
                shared = true;
        }
        db.records[i].unique = !shared;
    }
    return db;
}

AppDb load_app_db_file(const std::string& path, double epsilon) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open app database file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_app_db(buf.str(), epsilon);
}

std::vector<std::string> marking_mismatches(const AppDb& db) {
    std::vector<std::string> out;
    for (const AppRecord& rec : db.records) {
        if (rec.unique != rec.unique_marked)
            out.push_back(rec.name);
    }
    return out;
}

MatchResult match_apps(const AppDb& db, const std::vector<DetectionEvent>& detections,
                       double epsilon) {
    MatchResult result;
    const AppRecord* sole_exact = nullptr;
    for (const AppRecord& rec : db.records) {
        bool covered = std::all_of(
            rec.combo.begin(), rec.combo.end(), [&](const ComboEntry& e) {
                return std::any_of(detections.begin(), detections.end(),
                                   [&](const DetectionEvent& d) {
                                       return detection_matches(d, e, epsilon);
                                   });
            });
        if (!covered)
            continue;
        result.candidates.push_back(rec.name);
        bool accounted = std::all_of(
            detections.begin(), detections.end(), [&](const DetectionEvent& d) {
                return std::any_of(rec.combo.begin(), rec.combo.end(),
                                   [&](const ComboEntry& e) {
                                       return detection_matches(d, e, epsilon);
                                   });
            });
        if (accounted) {
            result.exact.push_back(rec.name);
            sole_exact = result.exact.size() == 1 ? &rec : nullptr;
        }
    }
    result.unique = sole_exact != nullptr && sole_exact->unique;
    return result;
}

} // namespace senmux
