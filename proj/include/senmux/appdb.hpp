// Database of per-app sensor registration combos and matching of observed
// registrations against it.  An app's combo is the set of (sensor, rate)
// registrations it makes at startup; combos shared by several apps can only
// narrow the candidate list, unshared combos identify the app outright.
#pragma once

#include "senmux/fingerprint.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace senmux {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class SchemaViolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One registration in an app's combo: an SDK preset, or a raw period.
struct ComboEntry {
    Sensor sensor = Sensor::AC;
    std::optional<SdkRate> constant;
    std::uint64_t period_us = 0; // used when constant is empty
};

struct AppRecord {
    std::string name;
    std::string category;
    std::vector<ComboEntry> combo;
    bool unique_marked = false; // uniqueness flag as recorded in the file
    bool unique = false;        // recomputed: no other record has an equal combo
};

struct AppDb {
    int schema_version = 1;
    std::vector<AppRecord> records;
};

// True when the two combos are indistinguishable: same sensors, same
// presets, raw periods within epsilon of each other (symmetric).
bool combos_equal(const std::vector<ComboEntry>& a, const std::vector<ComboEntry>& b,
                  double epsilon = 0.1);

// Parses the JSON database, validates it (unique app names, at least one
// combo entry per app, at most one entry per sensor), and recomputes every
// record's unique flag from combo equality across the whole set.
AppDb parse_app_db(const std::string& json_text, double epsilon = 0.1);
AppDb load_app_db_file(const std::string& path, double epsilon = 0.1);

// Names of records whose recorded uniqueness flag disagrees with the
// recomputed one.
std::vector<std::string> marking_mismatches(const AppDb& db);

struct MatchResult {
    // Every record whose whole combo is covered by the detections.
    std::vector<std::string> candidates;
    // Candidates whose combo also accounts for every detection.
    std::vector<std::string> exact;
    // Single exact match whose combo no other record shares.
    bool unique = false;
};

MatchResult match_apps(const AppDb& db, const std::vector<DetectionEvent>& detections,
                       double epsilon = 0.1);

} // namespace senmux
