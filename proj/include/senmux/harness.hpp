// Experiment runner: seeded trial batches over the covert channel and the
// rate observer, with deterministic CSV emission.  Every command writes an
// aggregate table plus a raw per-trial table (derived path, ".raw.csv") so
// aggregates can be recomputed independently.
#pragma once

#include "senmux/appdb.hpp"
#include "senmux/covert.hpp"
#include "senmux/fingerprint.hpp"
#include "senmux/profile.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace senmux {

enum class ExperimentKind { Sweep, Constants, Apps, Jitter };

std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_string(const std::string& name);

// Default pulse-width sweep grid (microseconds).
const std::vector<std::uint64_t>& default_sweep_grid();

struct BitLengthRange {
    std::uint32_t min = 64;
    std::uint32_t max = 64;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Sweep;
    std::string profile; // bundled name or file path; empty = kind default
                         // (reference device for apps, poco_f1 otherwise)
    MuxPolicy policy = MuxPolicy::MaxFrequency;
    std::vector<std::uint64_t> seeds{1};
    int trials = 100;
    std::vector<std::uint64_t> grid_us; // pulse widths; empty = default grid
    BitLengthRange bits;
    std::string out_path;
    std::string params_path; // channel parameter sets; empty = bundled
    std::string db_path;     // app database; empty = bundled
    std::uint64_t fail_threshold = UINT64_MAX; // sweep: max tolerated failures
    bool include_indistinguishable = false;    // constants: also run dead cells
};

// JSON config file with the same field names as the flags; see README.
ExperimentConfig load_config_file(const std::string& path);

// One measured transmitter/receiver period set for a device sensor.
struct ChannelParamSet {
    std::string device;
    Sensor sensor = Sensor::AC;
    std::uint64_t t_c_us = 0;
    std::uint64_t t_tr_us = 0;
    std::uint64_t t_sync_us = 0;
    std::uint64_t t_end_us = 0;

    ChannelParams channel_params(std::uint64_t pulse_width_us, double epsilon = 0.1) const;
};

std::vector<ChannelParamSet> parse_channel_params(const std::string& json_text);
std::vector<ChannelParamSet> load_channel_params_file(const std::string& path);
// Entries for one device, from a file or the bundled table when path is empty.
std::vector<ChannelParamSet> channel_params_for(const std::string& device,
                                                const std::string& path = "");

struct SweepRow {
    std::string device;
    Sensor sensor = Sensor::AC;
    std::uint64_t pulse_width_us = 0;
    int trials = 0;
    std::uint64_t failures = 0;       // transmissions that never completed
    double mean_edit_distance = 0.0;  // failures count as total loss
    double median_bit_rate_bps = 0.0; // over completed transmissions
};

struct SweepTrialRow {
    std::string device;
    Sensor sensor = Sensor::AC;
    std::uint64_t pulse_width_us = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::size_t sent_bits = 0;
    bool success = false;
    std::size_t edit_dist = 0;
    double bit_rate_bps = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepTrialRow> raw;
    std::uint64_t total_failures = 0;
};

SweepResult run_sweep(const DeviceProfile& profile, const std::vector<ChannelParamSet>& sets,
                      const ExperimentConfig& config);

struct ConstantsCell {
    std::string device;
    Sensor sensor = Sensor::AC;
    SdkRate rate = SdkRate::Fastest;
    bool distinguishable = false;
    int trials = 0;
    int detections = 0;    // trials with any detection on the sensor
    int label_correct = 0; // trials whose detection names the requested preset
    double mean_latency_ms = 0.0; // over label-correct trials
    double mean_period_us = 0.0;  // recovered period over detecting trials
};

struct ConstantsTrialRow {
    std::string device;
    Sensor sensor = Sensor::AC;
    SdkRate rate = SdkRate::Fastest;
    int trial = 0;
    std::uint64_t seed = 0;
    bool detected = false;
    bool label_correct = false;
    std::uint64_t period_us = 0;
    std::uint64_t latency_us = 0;
};

struct ConstantsResult {
    std::vector<ConstantsCell> cells;
    std::vector<ConstantsTrialRow> raw;
};

// Runs `trials` single-registration observer episodes per (sensor, preset)
// cell.  Sensors that ignore the requested rate entirely are skipped; cells
// that resolve too close to the carrier are included only on request.
ConstantsResult run_constants(const DeviceProfile& profile, const ExperimentConfig& config);

struct AppRow {
    std::string name;
    std::string category;
    std::size_t combo_size = 0;
    std::size_t detections = 0;
    std::size_t candidates = 0;
    std::size_t exact = 0;
    bool detected = false; // the app's own record is among the candidates
    bool unique = false;
};

struct AppTrialRow {
    std::string app;
    Sensor sensor = Sensor::AC;
    std::optional<SdkRate> constant;
    std::uint64_t period_us = 0;
    std::uint64_t latency_us = 0;
};

struct AppsResult {
    std::vector<AppRow> rows;
    std::vector<AppTrialRow> raw; // every observer detection during replay
    std::size_t detected_total = 0;
    std::size_t unique_total = 0;
    std::size_t conflicting_total = 0; // detected but not unique
};

// Replays every database combo as a victim script against the observer.
AppsResult run_apps(const AppDb& db, const DeviceProfile& profile,
                    const ExperimentConfig& config);

struct JitterRow {
    std::string device;
    Sensor sensor = Sensor::AC;
    std::uint64_t base_us = 0;
    Band band;
    std::size_t count = 0;
    double mean_us = 0.0;
    double std_us = 0.0;
    double rel_std = 0.0;
    std::size_t violations = 0; // gaps outside the band; must stay 0
};

struct JitterGapRow {
    Sensor sensor = Sensor::AC;
    std::size_t index = 0;
    std::uint64_t gap_us = 0;
};

struct JitterResult {
    std::vector<JitterRow> rows;
    std::vector<JitterGapRow> raw;
};

// Samples generated (pre-drop) gaps per sensor at the fastest supported
// rate: 10,000 gaps each, with band-violation counting.
JitterResult run_jitter(const DeviceProfile& profile, const ExperimentConfig& config,
                        std::size_t gaps_per_sensor = 10'000);

// CSV emission.  Deterministic: fixed headers, '\n' line ends, numbers
// formatted with std::to_chars.
std::string format_double(double value);
std::string raw_output_path(const std::string& out_path);

void write_sweep_csv(const std::string& out_path, const SweepResult& result);
void write_constants_csv(const std::string& out_path, const ConstantsResult& result);
void write_apps_csv(const std::string& out_path, const AppsResult& result);
void write_jitter_csv(const std::string& out_path, const JitterResult& result);

} // namespace senmux
