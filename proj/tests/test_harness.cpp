// Tests for the experiment runner: config parsing, channel parameter
// tables, the four experiment kinds at desk scale, and CSV emission.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "senmux/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace senmux;

namespace {

std::filesystem::path scratch_dir() {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "senmux_harness_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_scratch(const std::string& name, const std::string& content) {
    std::filesystem::path path = scratch_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("experiment kinds round-trip through their names") {
    for (ExperimentKind kind : {ExperimentKind::Sweep, ExperimentKind::Constants,
                                ExperimentKind::Apps, ExperimentKind::Jitter}) {
        auto back = experiment_from_string(to_string(kind));
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK_FALSE(experiment_from_string("census").has_value());
}

TEST_CASE("default sweep grid spans 25 to 350 ms") {
    const auto& grid = default_sweep_grid();
    REQUIRE(grid.size() == 9);
    CHECK(grid.front() == 25'000);
    CHECK(grid.back() == 350'000);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("doubles format compactly and deterministically") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(2.25) == "2.25");
}

TEST_CASE("raw table path derives from the aggregate path") {
    CHECK(raw_output_path("out.csv") == "out.raw.csv");
    CHECK(raw_output_path("plain") == "plain.raw.csv");
    std::filesystem::path nested = raw_output_path("results/run.csv");
    CHECK(nested.filename() == "run.raw.csv");
}

TEST_CASE("config files populate every field") {
    std::string path = write_scratch("full_config.json", R"({
        "kind": "constants",
        "profile": "moto_g5",
        "policy": "per_app_enforced",
        "seeds": [3, 4],
        "trials": 7,
        "grid_us": [50000, 100000],
        "bits": {"min": 8, "max": 24},
        "out": "table.csv",
        "params": "params.json",
        "db": "apps.json",
        "fail_threshold": 5,
        "include_indistinguishable": true
    })");
    ExperimentConfig cfg = load_config_file(path);
    CHECK(cfg.kind == ExperimentKind::Constants);
    CHECK(cfg.profile == "moto_g5");
    CHECK(cfg.policy == MuxPolicy::PerAppEnforced);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.trials == 7);
    CHECK(cfg.grid_us == std::vector<std::uint64_t>{50'000, 100'000});
    CHECK(cfg.bits.min == 8);
    CHECK(cfg.bits.max == 24);
    CHECK(cfg.out_path == "table.csv");
    CHECK(cfg.params_path == "params.json");
    CHECK(cfg.db_path == "apps.json");
    CHECK(cfg.fail_threshold == 5);
    CHECK(cfg.include_indistinguishable);
}

TEST_CASE("config shorthands and rejects") {
    std::string path = write_scratch("short_config.json", R"({"seed": 11, "bits": 32})");
    ExperimentConfig cfg = load_config_file(path);
    CHECK(cfg.kind == ExperimentKind::Sweep); // default
    CHECK(cfg.seeds == std::vector<std::uint64_t>{11});
    CHECK(cfg.bits.min == 32);
    CHECK(cfg.bits.max == 32);

    CHECK_THROWS_AS(load_config_file(write_scratch("bad_json.json", "{nope")), ParseError);
    CHECK_THROWS_AS(load_config_file(write_scratch("not_object.json", "[1, 2]")),
                    SchemaViolationError);
    CHECK_THROWS_AS(load_config_file(write_scratch("bad_kind.json", R"({"kind": "census"})")),
                    SchemaViolationError);
    CHECK_THROWS_AS(
        load_config_file(write_scratch("bad_policy.json", R"({"policy": "fastest_wins"})")),
        SchemaViolationError);
    CHECK_THROWS_AS(
        load_config_file(write_scratch("bad_bits.json", R"({"bits": {"min": 9, "max": 8}})")),
        SchemaViolationError);
    CHECK_THROWS_AS(load_config_file(write_scratch("no_seeds.json", R"({"seeds": []})")),
                    SchemaViolationError);
    CHECK_THROWS_AS(load_config_file((scratch_dir() / "missing.json").string()), ParseError);
}

TEST_CASE("channel parameter tables parse and filter by device") {
    std::vector<ChannelParamSet> poco = channel_params_for("poco_f1");
    std::vector<ChannelParamSet> pixel = channel_params_for("pixel_4a");
    std::vector<ChannelParamSet> moto = channel_params_for("moto_g5");
    CHECK(poco.size() == 6);
    CHECK(pixel.size() == 6);
    CHECK(moto.size() == 2);
    CHECK(channel_params_for("nexus_one").empty());

    auto ac = std::find_if(poco.begin(), poco.end(),
                           [](const ChannelParamSet& s) { return s.sensor == Sensor::AC; });
    REQUIRE(ac != poco.end());
    CHECK(ac->t_c_us == 10'000);
    CHECK(ac->t_tr_us == 7'500);
    CHECK(ac->t_sync_us == 5'000);
    CHECK(ac->t_end_us == 2'500);

    ChannelParams params = ac->channel_params(120'000, 0.08);
    CHECK(params.sensor == Sensor::AC);
    CHECK(params.pulse_width_us == 120'000);
    CHECK(params.epsilon == doctest::Approx(0.08));
    CHECK(params.t_c_us == 10'000);
    CHECK(params.t_end_us == 2'500);
}

TEST_CASE("channel parameter parsing rejects malformed sets") {
    CHECK_THROWS_AS(parse_channel_params("oops"), ParseError);
    CHECK_THROWS_AS(parse_channel_params(R"({"sets": 3})"), SchemaViolationError);
    CHECK_THROWS_AS(parse_channel_params(R"({"sets": [{"device": "d"}]})"),
                    SchemaViolationError);
    CHECK_THROWS_AS(parse_channel_params(R"({"sets": [{"device": "d", "sensor": "sonar",
        "t_c_us": 1, "t_tr_us": 1, "t_sync_us": 1, "t_end_us": 1}]})"),
                    SchemaViolationError);
    CHECK_THROWS_AS(parse_channel_params(R"({"sets": [{"device": "d", "sensor": "gyroscope",
        "t_c_us": 0, "t_tr_us": 1, "t_sync_us": 1, "t_end_us": 1}]})"),
                    SchemaViolationError);
    CHECK_THROWS_AS(parse_channel_params(R"({"sets": [{"device": "d", "sensor": "gyroscope",
        "t_c_us": 1, "t_tr_us": 1, "t_sync_us": 1}]})"),
                    SchemaViolationError);
}

TEST_CASE("trial batches demand at least one trial and seed") {
    DeviceProfile profile = load_bundled_profile("poco_f1");
    std::vector<ChannelParamSet> sets = channel_params_for("poco_f1");
    ExperimentConfig config;
    config.trials = 0;
    CHECK_THROWS_AS(run_sweep(profile, sets, config), std::invalid_argument);
    CHECK_THROWS_AS(run_constants(profile, config), std::invalid_argument);
    config.trials = 1;
    config.seeds.clear();
    CHECK_THROWS_AS(run_sweep(profile, sets, config), std::invalid_argument);
    CHECK_THROWS_AS(run_constants(profile, config), std::invalid_argument);
}

TEST_CASE("a small sweep transmits cleanly and reproducibly") {
    DeviceProfile profile = load_bundled_profile("poco_f1");
    std::vector<ChannelParamSet> sets = channel_params_for("poco_f1");
    sets.erase(std::remove_if(sets.begin(), sets.end(),
                              [](const ChannelParamSet& s) { return s.sensor != Sensor::AC; }),
               sets.end());
    REQUIRE(sets.size() == 1);

    ExperimentConfig config;
    config.trials = 3;
    config.seeds = {9};
    config.grid_us = {150'000};
    config.bits = {16, 16};

    SweepResult result = run_sweep(profile, sets, config);
    REQUIRE(result.rows.size() == 1);
    const SweepRow& row = result.rows[0];
    CHECK(row.device == "poco_f1");
    CHECK(row.trials == 3);
    CHECK(row.failures == 0);
    CHECK(row.mean_edit_distance == doctest::Approx(0.0));
    CHECK(row.median_bit_rate_bps > 0.0);
    CHECK(result.total_failures == 0);
    REQUIRE(result.raw.size() == 3);
    for (const SweepTrialRow& trial : result.raw) {
        CHECK(trial.success);
        CHECK(trial.sent_bits == 16);
        CHECK(trial.edit_dist == 0);
        CHECK(trial.bit_rate_bps > 0.0);
    }

    SweepResult again = run_sweep(profile, sets, config);
    CHECK(again.rows[0].median_bit_rate_bps ==
          doctest::Approx(result.rows[0].median_bit_rate_bps));
    REQUIRE(again.raw.size() == result.raw.size());
    for (std::size_t i = 0; i < again.raw.size(); ++i)
        CHECK(again.raw[i].bit_rate_bps == doctest::Approx(result.raw[i].bit_rate_bps));
}

TEST_CASE("payload lengths vary within the configured range") {
    DeviceProfile profile = load_bundled_profile("poco_f1");
    std::vector<ChannelParamSet> sets = channel_params_for("poco_f1");
    sets.erase(std::remove_if(sets.begin(), sets.end(),
                              [](const ChannelParamSet& s) { return s.sensor != Sensor::AC; }),
               sets.end());

    ExperimentConfig config;
    config.trials = 6;
    config.seeds = {2};
    config.grid_us = {150'000};
    config.bits = {8, 24};

    SweepResult result = run_sweep(profile, sets, config);
    REQUIRE(result.raw.size() == 6);
    bool varied = false;
    for (const SweepTrialRow& trial : result.raw) {
        CHECK(trial.sent_bits >= 8);
        CHECK(trial.sent_bits <= 24);
        varied = varied || trial.sent_bits != result.raw[0].sent_bits;
    }
    CHECK(varied);
}

TEST_CASE("constants table covers both observable and dead cells") {
    DeviceProfile moto = load_bundled_profile("moto_g5");
    ExperimentConfig config;
    config.trials = 2;
    config.seeds = {1};
    config.include_indistinguishable = true;

    ConstantsResult result = run_constants(moto, config);
    // Single-frequency sensors carry no cells at all; the remaining two
    // sensors have one cell per preset.
    REQUIRE(result.cells.size() == 8);
    for (const ConstantsCell& cell : result.cells) {
        bool watched = cell.sensor == Sensor::AC || cell.sensor == Sensor::GY;
        CHECK(watched);
        CHECK(cell.trials == 2);
        if (cell.distinguishable) {
            CHECK(cell.detections == 2);
            CHECK(cell.label_correct == 2);
            CHECK(cell.mean_latency_ms > 0.0);
            CHECK(cell.mean_period_us > 0.0);
        } else {
            CHECK(cell.rate == SdkRate::Normal);
            CHECK(cell.detections == 0);
            CHECK(cell.label_correct == 0);
        }
    }
    CHECK(result.raw.size() == 16);

    config.include_indistinguishable = false;
    ConstantsResult trimmed = run_constants(moto, config);
    CHECK(trimmed.cells.size() == 6);
    for (const ConstantsCell& cell : trimmed.cells)
        CHECK(cell.distinguishable);
}

TEST_CASE("app replay separates unique from conflicting combos") {
    AppDb db = parse_app_db(R"({
        "apps": [
            {"name": "A", "combo": [{"sensor": "accelerometer", "rate": "game"}]},
            {"name": "B", "combo": [{"sensor": "accelerometer", "rate": "game"},
                                    {"sensor": "gyroscope", "rate": "ui"}]},
            {"name": "C", "combo": [{"sensor": "accelerometer", "rate": "game"}]}
        ]
    })");
    ExperimentConfig config;
    config.seeds = {4};

    AppsResult result = run_apps(db, load_bundled_profile("reference"), config);
    REQUIRE(result.rows.size() == 3);
    CHECK(result.detected_total == 3);
    CHECK(result.unique_total == 1);
    CHECK(result.conflicting_total == 2);

    const AppRow& a = result.rows[0];
    CHECK(a.name == "A");
    CHECK(a.detections == 1);
    CHECK(a.candidates == 2); // A and C both cover a lone game accelerometer
    CHECK(a.exact == 2);
    CHECK(a.detected);
    CHECK_FALSE(a.unique);

    const AppRow& b = result.rows[1];
    CHECK(b.detections == 2);
    CHECK(b.candidates == 3);
    CHECK(b.exact == 1);
    CHECK(b.detected);
    CHECK(b.unique);

    REQUIRE(result.raw.size() == 4);
    for (const AppTrialRow& r : result.raw)
        CHECK(r.latency_us > 0);
}

TEST_CASE("jitter survey stays inside delivery bands") {
    DeviceProfile profile = load_bundled_profile("poco_f1");
    ExperimentConfig config;
    config.seeds = {6};

    JitterResult result = run_jitter(profile, config, 400);
    REQUIRE(result.rows.size() == 6);
    for (const JitterRow& row : result.rows) {
        CHECK(row.count == 400);
        CHECK(row.violations == 0);
        CHECK(row.mean_us >= static_cast<double>(row.band.lo_us));
        CHECK(row.mean_us <= static_cast<double>(row.band.hi_us));
        CHECK(row.base_us > 0);
    }
    CHECK(result.raw.size() == 6 * 400);

    JitterResult again = run_jitter(profile, config, 400);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        CHECK(again.rows[i].mean_us == result.rows[i].mean_us);
        CHECK(again.rows[i].std_us == result.rows[i].std_us);
    }
}

TEST_CASE("sweep tables serialize byte-exactly") {
    SweepResult result;
    SweepRow row;
    row.device = "poco_f1";
    row.sensor = Sensor::AC;
    row.pulse_width_us = 100'000;
    row.trials = 2;
    row.failures = 1;
    row.mean_edit_distance = 8.5;
    row.median_bit_rate_bps = 0.0;
    result.rows.push_back(row);

    SweepTrialRow t0;
    t0.device = "poco_f1";
    t0.sensor = Sensor::AC;
    t0.pulse_width_us = 100'000;
    t0.trial = 0;
    t0.seed = 9;
    t0.sent_bits = 16;
    t0.success = true;
    t0.edit_dist = 0;
    t0.bit_rate_bps = 6.5;
    SweepTrialRow t1 = t0;
    t1.trial = 1;
    t1.seed = 8;
    t1.success = false;
    t1.edit_dist = 16;
    t1.bit_rate_bps = 0.0;
    result.raw = {t0, t1};

    std::string path = (scratch_dir() / "swp.csv").string();
    write_sweep_csv(path, result);
    CHECK(slurp(path) ==
          "device,sensor,pulse_width_us,trials,failures,mean_edit_distance,"
          "median_bit_rate_bps\n"
          "poco_f1,accelerometer,100000,2,1,8.5,0\n");
    CHECK(slurp(raw_output_path(path)) ==
          "device,sensor,pulse_width_us,trial,seed,sent_bits,success,edit_distance,"
          "bit_rate_bps\n"
          "poco_f1,accelerometer,100000,0,9,16,1,0,6.5\n"
          "poco_f1,accelerometer,100000,1,8,16,0,16,0\n");
}

TEST_CASE("csv fields with commas and quotes are escaped") {
    AppsResult result;
    AppRow row;
    row.name = "Weird \"App\", Inc";
    row.category = "cat,1";
    row.combo_size = 1;
    row.detections = 1;
    row.candidates = 1;
    row.exact = 1;
    row.detected = true;
    row.unique = true;
    result.rows.push_back(row);
    result.raw.push_back({"Weird \"App\", Inc", Sensor::GY, SdkRate::Game, 19'870, 40'000});

    std::string path = (scratch_dir() / "apps.csv").string();
    write_apps_csv(path, result);
    CHECK(slurp(path) == "app,category,combo_size,detections,candidates,exact,detected,unique\n"
                         "\"Weird \"\"App\"\", Inc\",\"cat,1\",1,1,1,1,1,1\n");
    CHECK(slurp(raw_output_path(path)) ==
          "app,sensor,constant,period_us,latency_us\n"
          "\"Weird \"\"App\"\", Inc\",gyroscope,game,19870,40000\n");
}
