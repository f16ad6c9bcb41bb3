// Acceptance gate: drives the library end to end against its shipped
// guarantees and prints one pass/fail line per criterion.  Exits nonzero
// when any criterion fails, so it can anchor CI.
#include "senmux/covert.hpp"
#include "senmux/fingerprint.hpp"
#include "senmux/harness.hpp"
#include "senmux/payload.hpp"
#include "senmux/profile.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace senmux;

namespace {

constexpr std::uint64_t kSeed = 2026;

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

const std::vector<std::string>& device_names() {
    static const std::vector<std::string> names{"poco_f1", "pixel_4a", "moto_g5"};
    return names;
}

// ---------------------------------------------------------------- 1 ------

bool exact_gaps(const Capture& capture, std::uint64_t expected, std::string& error) {
    if (capture.events.size() < 10) {
        error = fmt("only %zu events delivered", capture.events.size());
        return false;
    }
    for (std::uint64_t gap : capture.gaps()) {
        if (gap != expected) {
            error = fmt("gap %llu != %llu", static_cast<unsigned long long>(gap),
                        static_cast<unsigned long long>(expected));
            return false;
        }
    }
    return true;
}

CriterionResult mux_semantics() {
    // 100 Hz and 50 Hz listeners: one shared stream at the faster rate
    // under multiplexing, isolated streams under per-app enforcement.
    std::string error;
    {
        Engine engine;
        SensorStack stack(engine, noiseless_profile(), {}, kSeed);
        Capture fast, slow;
        stack.register_listener("a", Sensor::AC, 10'000, fast.cb());
        stack.register_listener("b", Sensor::AC, 20'000, slow.cb());
        engine.run_until(SimTime{2'000'000});
        if (!exact_gaps(fast, 10'000, error) || !exact_gaps(slow, 10'000, error))
            return {false, "shared stream: " + error};
        if (fast.events.size() != slow.events.size())
            return {false, "shared stream delivered different event counts"};
    }
    {
        Engine engine;
        SensorStack::Options options;
        options.policy = MuxPolicy::PerAppEnforced;
        SensorStack stack(engine, noiseless_profile(), options, kSeed);
        Capture fast, slow;
        stack.register_listener("a", Sensor::AC, 10'000, fast.cb());
        stack.register_listener("b", Sensor::AC, 20'000, slow.cb());
        engine.run_until(SimTime{2'000'000});
        if (!exact_gaps(fast, 10'000, error) || !exact_gaps(slow, 20'000, error))
            return {false, "isolated streams: " + error};
    }

    // Exhaustive oracle: every registration sequence of up to three
    // listeners over three periods, checked after each register and each
    // (front-to-back) unregister, under all three policies.
    const std::vector<std::uint64_t> periods{10'000, 15'000, 40'000};
    const std::vector<MuxPolicy> policies{MuxPolicy::MaxFrequency, MuxPolicy::PerAppEnforced,
                                          MuxPolicy::QuantizedRates};
    std::size_t states = 0;
    for (MuxPolicy policy : policies) {
        for (std::size_t n = 1; n <= 3; ++n) {
            std::size_t total = 1;
            for (std::size_t i = 0; i < n; ++i)
                total *= periods.size();
            for (std::size_t code = 0; code < total; ++code) {
                std::vector<std::uint64_t> requests;
                for (std::size_t i = 0, c = code; i < n; ++i, c /= periods.size())
                    requests.push_back(periods[c % periods.size()]);

                Engine engine;
                SensorStack::Options options;
                options.policy = policy;
                SensorStack stack(engine, noiseless_profile(), options, kSeed);

                std::vector<ListenerHandle> handles;
                auto check = [&](std::size_t first, std::size_t last) -> bool {
                    std::vector<std::uint64_t> active(requests.begin() +
                                                          static_cast<std::ptrdiff_t>(first),
                                                      requests.begin() +
                                                          static_cast<std::ptrdiff_t>(last));
                    std::uint64_t expect_shared =
                        policy == MuxPolicy::QuantizedRates
                            ? oracles::quantized_period(active, options.allowed_periods_us)
                            : oracles::shared_period(active);
                    if (stack.effective_period(Sensor::AC) != expect_shared)
                        return false;
                    for (std::size_t i = first; i < last; ++i) {
                        std::uint64_t expect_listener = policy == MuxPolicy::PerAppEnforced
                                                            ? requests[i]
                                                            : expect_shared;
                        if (stack.listener_period(handles[i]) != expect_listener)
                            return false;
                    }
                    return true;
                };

                for (std::size_t i = 0; i < n; ++i) {
                    handles.push_back(stack.register_listener(fmt("app%zu", i), Sensor::AC,
                                                              requests[i]));
                    if (!check(0, i + 1))
                        return {false, fmt("policy %s: wrong period after %zu registrations",
                                           to_string(policy).c_str(), i + 1)};
                    ++states;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    stack.unregister_listener(handles[i]);
                    if (i + 1 < n) {
                        if (!check(i + 1, n))
                            return {false,
                                    fmt("policy %s: wrong period after unregistering %zu",
                                        to_string(policy).c_str(), i + 1)};
                    } else {
                        try {
                            stack.effective_period(Sensor::AC);
                            return {false, "empty sensor still reports a period"};
                        } catch (const NoListenersError&) {
                        }
                    }
                    ++states;
                }
            }
        }
    }
    return {true, fmt("shared/isolated gap checks exact; %zu oracle states over 3 policies",
                      states)};
}

// ---------------------------------------------------------------- 2 ------

CriterionResult band_compliance() {
    std::size_t combos = 0;
    std::size_t total_gaps = 0;
    std::size_t violations = 0;
    for (const char* name : {"poco_f1", "pixel_4a", "moto_g5", "reference"}) {
        DeviceProfile profile = load_bundled_profile(name);
        for (Sensor sensor : profile.sensor_list()) {
            const SensorSpec& spec = profile.spec(sensor);
            const std::uint64_t requests[] = {
                spec.min_period_us / 2,                                              // too fast
                spec.min_period_us + (spec.max_period_us - spec.min_period_us) / 2,  // in range
                spec.max_period_us + spec.max_period_us / 2 + 1,                     // too slow
            };
            for (std::uint64_t request : requests) {
                Engine engine;
                SensorStack stack(engine, profile, {}, kSeed + combos);
                Band band = band_for_request(spec, request);

                std::vector<std::uint64_t> gaps;
                gaps.reserve(10'000);
                stack.set_gap_probe([&](Sensor gs, std::uint64_t gap) {
                    if (gs == sensor && gaps.size() < 10'000)
                        gaps.push_back(gap);
                });
                stack.register_listener("probe", sensor, request);

                SimTime t{0};
                while (gaps.size() < 10'000) {
                    t = advance(t, 10'000'000);
                    engine.run_until(t);
                }
                for (std::uint64_t gap : gaps) {
                    if (gap < band.lo_us || gap > band.hi_us)
                        ++violations;
                }
                total_gaps += gaps.size();
                ++combos;
            }
        }
    }
    bool pass = violations == 0 && combos == 69;
    return {pass, fmt("%zu gaps over %zu (profile, sensor, request class) combos, "
                      "%zu band violations",
                      total_gaps, combos, violations)};
}

// ---------------------------------------------------------------- 3 ------

CriterionResult channel_throughput() {
    struct Target {
        const char* device;
        Sensor sensor;
        std::uint64_t width_us;
        double bps;
    };
    const Target targets[] = {
        {"poco_f1", Sensor::MF, 100'000, 9.62},  {"poco_f1", Sensor::AC, 150'000, 5.10},
        {"pixel_4a", Sensor::AC, 150'000, 5.10}, {"pixel_4a", Sensor::GR, 150'000, 7.37},
        {"poco_f1", Sensor::LA, 350'000, 2.89},
    };

    std::string summary;
    for (const Target& target : targets) {
        DeviceProfile profile = load_bundled_profile(target.device);
        std::vector<ChannelParamSet> sets = channel_params_for(target.device);
        sets.erase(std::remove_if(
                       sets.begin(), sets.end(),
                       [&](const ChannelParamSet& s) { return s.sensor != target.sensor; }),
                   sets.end());
        if (sets.size() != 1)
            return {false, fmt("no parameter set for %s/%s", target.device,
                               to_string(target.sensor).c_str())};

        ExperimentConfig config;
        config.trials = 100;
        config.seeds = {kSeed};
        config.grid_us = {target.width_us};
        config.bits = {64, 64};
        SweepResult result = run_sweep(profile, sets, config);
        const SweepRow& row = result.rows.at(0);

        if (row.failures != 0)
            return {false, fmt("%s/%s: %llu of 100 transmissions failed", target.device,
                               to_string(target.sensor).c_str(),
                               static_cast<unsigned long long>(row.failures))};
        if (row.mean_edit_distance != 0.0)
            return {false, fmt("%s/%s: mean edit distance %.3f != 0", target.device,
                               to_string(target.sensor).c_str(), row.mean_edit_distance)};
        double deviation = std::fabs(row.median_bit_rate_bps - target.bps);
        if (deviation > 0.25 * target.bps)
            return {false, fmt("%s/%s: median %.2f bps outside 25%% of %.2f", target.device,
                               to_string(target.sensor).c_str(), row.median_bit_rate_bps,
                               target.bps)};
        if (!summary.empty())
            summary += ", ";
        summary += fmt("%s/%s %.2f~%.2f", target.device, to_string(target.sensor).c_str(),
                       row.median_bit_rate_bps, target.bps);
    }
    return {true, "error-free at 100 trials each; median bps vs target: " + summary};
}

// ---------------------------------------------------------------- 4 ------

CriterionResult reliability_trend() {
    std::size_t points = 0;
    std::size_t pairs = 0;
    for (const std::string& device : device_names()) {
        DeviceProfile profile = load_bundled_profile(device);
        std::vector<ChannelParamSet> sets = channel_params_for(device);

        ExperimentConfig config;
        config.trials = 25;
        config.seeds = {kSeed};
        config.bits = {64, 64}; // grid left empty: default sweep grid
        SweepResult result = run_sweep(profile, sets, config);
        points += result.rows.size();

        for (std::size_t i = 1; i < result.rows.size(); ++i) {
            const SweepRow& prev = result.rows[i - 1];
            const SweepRow& row = result.rows[i];
            if (row.sensor != prev.sensor)
                continue;
            ++pairs;
            if (row.mean_edit_distance > prev.mean_edit_distance)
                return {false,
                        fmt("%s/%s: mean edit distance rises %.3f -> %.3f at w=%llu",
                            device.c_str(), to_string(row.sensor).c_str(),
                            prev.mean_edit_distance, row.mean_edit_distance,
                            static_cast<unsigned long long>(row.pulse_width_us))};
        }
    }
    return {true, fmt("mean edit distance non-increasing across %zu grid points "
                      "(%zu adjacent pairs, 14 device-sensor series)",
                      points, pairs)};
}

// ---------------------------------------------------------------- 5 ------

CriterionResult countermeasures() {
    const MuxPolicy policies[] = {MuxPolicy::PerAppEnforced, MuxPolicy::QuantizedRates};
    std::size_t failed = 0;
    std::size_t total = 0;
    for (MuxPolicy policy : policies) {
        for (const std::string& device : device_names()) {
            DeviceProfile profile = load_bundled_profile(device);
            for (const ChannelParamSet& set : channel_params_for(device)) {
                for (int trial = 0; trial < 100; ++trial) {
                    std::uint64_t seed = kSeed + static_cast<std::uint64_t>(trial);
                    Rng rng(seed);
                    std::string bits = random_bits(64, rng);
                    ++total;
                    try {
                        run_channel(bits, set.channel_params(100'000), profile, policy, seed);
                        return {false, fmt("%s/%s under %s completed a transmission",
                                           device.c_str(), to_string(set.sensor).c_str(),
                                           to_string(policy).c_str())};
                    } catch (const ChannelFailureError&) {
                        ++failed;
                    }
                }
            }
        }
    }
    bool pass = failed == total && total == 2 * 14 * 100;
    return {pass, fmt("%zu/%zu transmissions failed under both countermeasure policies",
                      failed, total)};
}

// ---------------------------------------------------------------- 6 ------

CriterionResult fingerprint_cells() {
    int green = 0;
    int red = 0;
    double worst_ms = 0.0;
    double worst_game_ms = 0.0;
    for (const std::string& device : device_names()) {
        DeviceProfile profile = load_bundled_profile(device);
        ExperimentConfig config;
        config.trials = 100;
        config.seeds = {kSeed};
        config.include_indistinguishable = true;
        ConstantsResult result = run_constants(profile, config);
        for (const ConstantsCell& cell : result.cells) {
            std::string where = to_string(cell.sensor);
            if (cell.distinguishable) {
                ++green;
                if (cell.detections != 100 || cell.label_correct != 100)
                    return {false, fmt("%s/%s@%s: %d/100 detected, %d/100 labeled",
                                       device.c_str(), where.c_str(), to_string(cell.rate).c_str(),
                                       cell.detections, cell.label_correct)};
                if (cell.mean_latency_ms >= 500.0)
                    return {false, fmt("%s/%s@%s: mean latency %.1f ms over budget",
                                       device.c_str(), where.c_str(), to_string(cell.rate).c_str(),
                                       cell.mean_latency_ms)};
                worst_ms = std::max(worst_ms, cell.mean_latency_ms);
                if (cell.rate == SdkRate::Game) {
                    if (cell.mean_latency_ms >= 100.0)
                        return {false, fmt("%s/%s@game: mean latency %.1f ms over budget",
                                           device.c_str(), where.c_str(), cell.mean_latency_ms)};
                    worst_game_ms = std::max(worst_game_ms, cell.mean_latency_ms);
                }
            } else {
                ++red;
                // An unobservable cell must never be attributed to its
                // preset, even when the stream itself shifts (redirected
                // presets are reported as their target instead).
                if (cell.label_correct != 0)
                    return {false, fmt("%s/%s@%s: unobservable cell attributed %d times",
                                       device.c_str(), where.c_str(), to_string(cell.rate).c_str(),
                                       cell.label_correct)};
            }
        }
    }
    bool pass = green == 46 && red == 10;
    return {pass, fmt("%d observable cells at 100/100 with correct labels (worst mean "
                      "latency %.0f ms, game %.0f ms); %d dead cells never attributed",
                      green, worst_ms, worst_game_ms, red)};
}

// ---------------------------------------------------------------- 7 ------

CriterionResult app_matching() {
    AppDb db = load_app_db_file(default_data_dir() + "/fingerprint_db.json");
    std::vector<std::string> stale = marking_mismatches(db);
    if (stale != std::vector<std::string>{"Grab"})
        return {false, fmt("expected exactly one stale uniqueness mark, found %zu",
                           stale.size())};

    ExperimentConfig config;
    config.seeds = {kSeed};
    AppsResult result = run_apps(db, load_bundled_profile("reference"), config);
    if (result.detected_total != 57 || result.unique_total != 13 ||
        result.conflicting_total != 44)
        return {false, fmt("detected %zu (want 57), unique %zu (want 13), conflicting %zu "
                           "(want 44)",
                           result.detected_total, result.unique_total,
                           result.conflicting_total)};

    auto pogo = std::find_if(result.rows.begin(), result.rows.end(),
                             [](const AppRow& r) { return r.name == "Pokémon Go"; });
    if (pogo == result.rows.end())
        return {false, "Pokémon Go missing from the replay"};
    if (!pogo->detected || !pogo->unique || pogo->exact != 1)
        return {false, fmt("Pokémon Go: detected=%d unique=%d exact=%zu",
                           pogo->detected ? 1 : 0, pogo->unique ? 1 : 0, pogo->exact)};
    return {true, "57/57 combos detected: 13 unique, 44 conflicting; Pokémon Go matches "
                  "uniquely; stale mark: Grab"};
}

// ---------------------------------------------------------------- 8 ------

CriterionResult codec_roundtrips() {
    Rng rng(kSeed);
    Rng image_rng = rng.substream(1);
    Rng gps_rng = rng.substream(2);
    Rng text_rng = rng.substream(3);
    Rng edit_rng = rng.substream(4);

    for (int i = 0; i < 1'000; ++i) {
        BitImage img;
        img.width = 1 + static_cast<std::uint32_t>(image_rng.below(40));
        img.height = 1 + static_cast<std::uint32_t>(image_rng.below(40));
        img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
        for (std::uint8_t& px : img.pixels)
            px = static_cast<std::uint8_t>(image_rng.below(2));
        if (!(decode_image(encode_image(img)) == img))
            return {false, fmt("image round trip %d diverged", i)};
    }

    for (int i = 0; i < 1'000; ++i) {
        GpsCoord coord;
        coord.latitude =
            (static_cast<double>(gps_rng.below(1'800'001)) - 900'000.0) / 10'000.0;
        coord.longitude =
            (static_cast<double>(gps_rng.below(3'600'001)) - 1'800'000.0) / 10'000.0;
        GpsCoord back = decode_gps(encode_gps(coord));
        if (!same_coordinate(coord, back))
            return {false, fmt("gps round trip %d diverged", i)};
    }

    for (int i = 0; i < 1'000; ++i) {
        std::string text;
        std::size_t len = edit_rng.below(33);
        for (std::size_t k = 0; k < len; ++k)
            text.push_back(static_cast<char>(32 + text_rng.below(95)));
        if (decode_text(encode_text(text)) != text)
            return {false, fmt("text round trip %d diverged", i)};
    }

    for (int i = 0; i < 1'000; ++i) {
        std::string a = random_bits(edit_rng.below(40), edit_rng);
        std::string b = random_bits(edit_rng.below(40), edit_rng);
        if (edit_distance(a, b) != oracles::edit_distance(a, b))
            return {false, fmt("edit distance disagrees with the oracle on pair %d", i)};
    }
    return {true, "1000 image, gps, and text round trips exact; edit distance matches the "
                  "oracle on 1000 pairs"};
}

// ---------------------------------------------------------------- 9 ------

std::string slurp_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CriterionResult csv_determinism() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "senmux_acceptance_csv";
    fs::create_directories(dir);

    std::vector<std::string> mismatched;
    auto compare = [&](const std::string& a, const std::string& b, const char* what) {
        std::string lhs = slurp_file(a);
        if (lhs.empty() || lhs != slurp_file(b))
            mismatched.push_back(what);
        std::string lhs_raw = slurp_file(raw_output_path(a));
        if (lhs_raw.empty() || lhs_raw != slurp_file(raw_output_path(b)))
            mismatched.push_back(std::string(what) + " raw");
    };

    DeviceProfile poco = load_bundled_profile("poco_f1");
    DeviceProfile moto = load_bundled_profile("moto_g5");
    DeviceProfile reference = load_bundled_profile("reference");

    {
        std::vector<ChannelParamSet> sets = channel_params_for("poco_f1");
        sets.erase(std::remove_if(sets.begin(), sets.end(),
                                  [](const ChannelParamSet& s) {
                                      return s.sensor != Sensor::AC;
                                  }),
                   sets.end());
        ExperimentConfig config;
        config.trials = 5;
        config.seeds = {kSeed};
        config.grid_us = {100'000};
        config.bits = {32, 32};
        for (int run = 0; run < 2; ++run) {
            std::string path = (dir / fmt("sweep%d.csv", run)).string();
            write_sweep_csv(path, run_sweep(poco, sets, config));
        }
        compare((dir / "sweep0.csv").string(), (dir / "sweep1.csv").string(), "sweep");
    }
    {
        ExperimentConfig config;
        config.trials = 3;
        config.seeds = {kSeed};
        config.include_indistinguishable = true;
        for (int run = 0; run < 2; ++run) {
            std::string path = (dir / fmt("constants%d.csv", run)).string();
            write_constants_csv(path, run_constants(moto, config));
        }
        compare((dir / "constants0.csv").string(), (dir / "constants1.csv").string(),
                "constants");
    }
    {
        AppDb db = load_app_db_file(default_data_dir() + "/fingerprint_db.json");
        ExperimentConfig config;
        config.seeds = {kSeed};
        for (int run = 0; run < 2; ++run) {
            std::string path = (dir / fmt("apps%d.csv", run)).string();
            write_apps_csv(path, run_apps(db, reference, config));
        }
        compare((dir / "apps0.csv").string(), (dir / "apps1.csv").string(), "apps");
    }
    {
        ExperimentConfig config;
        config.seeds = {kSeed};
        for (int run = 0; run < 2; ++run) {
            std::string path = (dir / fmt("jitter%d.csv", run)).string();
            write_jitter_csv(path, run_jitter(poco, config, 2'000));
        }
        compare((dir / "jitter0.csv").string(), (dir / "jitter1.csv").string(), "jitter");
    }

    if (!mismatched.empty()) {
        std::string detail = "differing outputs:";
        for (const std::string& m : mismatched)
            detail += " " + m;
        return {false, detail};
    }
    return {true, "8 file pairs byte-identical across repeated runs (4 experiment kinds, "
                  "aggregate + raw)"};
}

} // namespace

int main() {
    struct Entry {
        const char* name;
        CriterionResult (*fn)();
    };
    const Entry entries[] = {
        {"multiplex semantics", &mux_semantics},
        {"delivery-band compliance", &band_compliance},
        {"channel throughput", &channel_throughput},
        {"pulse-width reliability trend", &reliability_trend},
        {"countermeasure efficacy", &countermeasures},
        {"preset fingerprinting", &fingerprint_cells},
        {"app-combo matching", &app_matching},
        {"codec round trips", &codec_roundtrips},
        {"csv determinism", &csv_determinism},
    };

    bool all = true;
    int index = 1;
    for (const Entry& entry : entries) {
        auto start = std::chrono::steady_clock::now();
        CriterionResult result;
        try {
            result = entry.fn();
        } catch (const std::exception& e) {
            result = {false, std::string("unhandled exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        std::printf("criterion %d: %s  %s -- %s (%.1fs)\n", index, result.pass ? "PASS" : "FAIL",
                    entry.name, result.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && result.pass;
        ++index;
    }
    std::printf("%s\n", all ? "acceptance: all 9 criteria passed"
                            : "acceptance: at least one criterion FAILED");
    return all ? 0 : 1;
}
