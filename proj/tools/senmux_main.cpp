// Command-line experiment runner for the sensor multiplexing simulator:
// covert-channel pulse-width sweeps, observer detection-rate tables,
// app-combo replays, and jitter statistics, all seeded and CSV-emitting.
//
// Exit codes: 0 success, 1 configuration error, 2 experiment failure
// threshold exceeded.
#include "senmux/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

using namespace senmux;

// "64" or "64-256" / "64:256".
BitLengthRange parse_bits(const std::string& text) {
    BitLengthRange range;
    std::size_t sep = text.find_first_of("-:");
    try {
        if (sep == std::string::npos) {
            range.min = range.max = static_cast<std::uint32_t>(std::stoul(text));
        } else {
            range.min = static_cast<std::uint32_t>(std::stoul(text.substr(0, sep)));
            range.max = static_cast<std::uint32_t>(std::stoul(text.substr(sep + 1)));
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("--bits expects N or MIN-MAX");
    }
    if (range.min < 1 || range.min > range.max)
        throw std::invalid_argument("--bits range must satisfy 1 <= min <= max");
    return range;
}

int run_experiment(const ExperimentConfig& cfg) {
    // The app replay wants the study handset; the hardware experiments want a
    // measured device.
    std::string profile_name = cfg.profile;
    if (profile_name.empty())
        profile_name = cfg.kind == ExperimentKind::Apps ? "reference" : "poco_f1";
    DeviceProfile profile = load_bundled_profile(profile_name);
    std::string out =
        cfg.out_path.empty() ? to_string(cfg.kind) + ".csv" : cfg.out_path;

    switch (cfg.kind) {
    case ExperimentKind::Sweep: {
        std::vector<ChannelParamSet> sets = channel_params_for(profile.name, cfg.params_path);
        if (sets.empty()) {
            std::cerr << "no channel parameter sets for device '" << profile.name << "'\n";
            return 1;
        }
        SweepResult result = run_sweep(profile, sets, cfg);
        write_sweep_csv(out, result);
        std::cout << "sweep: " << result.rows.size() << " rows, " << result.total_failures
                  << " failed transmissions -> " << out << " (+ " << raw_output_path(out)
                  << ")\n";
        if (result.total_failures > cfg.fail_threshold) {
            std::cerr << "failures exceed threshold (" << result.total_failures << " > "
                      << cfg.fail_threshold << ")\n";
            return 2;
        }
        return 0;
    }
    case ExperimentKind::Constants: {
        ConstantsResult result = run_constants(profile, cfg);
        write_constants_csv(out, result);
        long interactions = 0;
        long correct = 0;
        for (const ConstantsCell& c : result.cells) {
            interactions += c.trials;
            correct += c.label_correct;
        }
        std::cout << "constants: " << result.cells.size() << " cells, " << interactions
                  << " interactions, " << correct << " correctly labelled -> " << out
                  << " (+ " << raw_output_path(out) << ")\n";
        return 0;
    }
    case ExperimentKind::Apps: {
        std::string db_path =
            cfg.db_path.empty() ? default_data_dir() + "/fingerprint_db.json" : cfg.db_path;
        AppDb db = load_app_db_file(db_path);
        for (const std::string& name : marking_mismatches(db))
            std::cout << "note: recorded uniqueness of '" << name
                      << "' disagrees with the recomputed flag\n";
        AppsResult result = run_apps(db, profile, cfg);
        write_apps_csv(out, result);
        std::cout << "apps: detected " << result.detected_total << "/" << db.records.size()
                  << ", unique " << result.unique_total << ", conflicting "
                  << result.conflicting_total << " -> " << out << " (+ "
                  << raw_output_path(out) << ")\n";
        return 0;
    }
    case ExperimentKind::Jitter: {
        JitterResult result = run_jitter(profile, cfg);
        write_jitter_csv(out, result);
        std::size_t violations = 0;
        for (const JitterRow& r : result.rows)
            violations += r.violations;
        std::cout << "jitter: " << result.rows.size() << " sensors, " << violations
                  << " band violations -> " << out << " (+ " << raw_output_path(out)
                  << ")\n";
        if (violations > 0) {
            std::cerr << "jitter: gaps fell outside the guaranteed band\n";
            return 2;
        }
        return 0;
    }
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor multiplexing simulator: covert-channel and rate-observer experiments"};
    app.require_subcommand(0, 1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON config file; explicit flags override its values");

    struct Flags {
        std::string profile;
        std::string policy;
        std::vector<std::uint64_t> seeds;
        int trials = 0;
        std::vector<std::uint64_t> grid;
        std::string bits;
        std::string out;
        std::string params;
        std::string db;
        std::uint64_t fail_threshold = 0;
        bool include_red = false;
    } flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--profile", flags.profile, "device profile name or file path");
        sub->add_option("--policy", flags.policy,
                        "max_frequency | per_app_enforced | quantized_rates");
        sub->add_option("--seed", flags.seeds, "base seed(s); trials derive seed^index")
            ->delimiter(',');
        sub->add_option("--trials", flags.trials, "trials per cell/point");
        sub->add_option("--out", flags.out, "aggregate CSV path (raw rows beside it)");
        return sub;
    };

    CLI::App* sweep = add_common(app.add_subcommand("sweep", "covert-channel pulse-width sweep"));
    sweep->add_option("--grid", flags.grid, "pulse widths in microseconds")->delimiter(',');
    sweep->add_option("--bits", flags.bits, "payload bit length: N or MIN-MAX");
    sweep->add_option("--params", flags.params, "channel parameter sets JSON");
    sweep->add_option("--fail-threshold", flags.fail_threshold,
                      "exit 2 when failed transmissions exceed this");

    CLI::App* constants =
        add_common(app.add_subcommand("constants", "observer detection-rate table"));
    constants->add_flag("--include-red", flags.include_red,
                        "also run cells whose preset resolves too close to the carrier");

    CLI::App* apps = add_common(app.add_subcommand("apps", "replay app combos and match"));
    apps->add_option("--db", flags.db, "app fingerprint database JSON");

    add_common(app.add_subcommand("jitter", "per-sensor gap statistics"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = load_config_file(config_path);

        CLI::App* sub = nullptr;
        for (CLI::App* s : {sweep, constants, apps, app.get_subcommand("jitter")}) {
            if (s->parsed())
                sub = s;
        }
        if (sub) {
            auto kind = experiment_from_string(sub->get_name());
            cfg.kind = *kind;
        } else if (config_path.empty()) {
            std::cerr << "pick a subcommand (sweep | constants | apps | jitter) or pass "
                         "--config\n";
            return 1;
        }

        if (sub) {
            // Not every flag exists on every subcommand; only merge the ones
            // this subcommand defines and the user actually passed.
            auto given = [&](const char* name) {
                const CLI::Option* opt = sub->get_option_no_throw(name);
                return opt && opt->count() > 0;
            };
            if (given("--profile"))
                cfg.profile = flags.profile;
            if (given("--policy")) {
                auto policy = policy_from_string(flags.policy);
                if (!policy)
                    throw std::invalid_argument("unknown policy '" + flags.policy + "'");
                cfg.policy = *policy;
            }
            if (given("--seed"))
                cfg.seeds = flags.seeds;
            if (given("--trials"))
                cfg.trials = flags.trials;
            if (given("--out"))
                cfg.out_path = flags.out;
            if (given("--grid"))
                cfg.grid_us = flags.grid;
            if (given("--bits"))
                cfg.bits = parse_bits(flags.bits);
            if (given("--params"))
                cfg.params_path = flags.params;
            if (given("--db"))
                cfg.db_path = flags.db;
            if (given("--fail-threshold"))
                cfg.fail_threshold = flags.fail_threshold;
            if (given("--include-red"))
                cfg.include_indistinguishable = flags.include_red;
        }
        if (cfg.trials < 1)
            throw std::invalid_argument("trials must be at least 1");
        if (cfg.seeds.empty())
            throw std::invalid_argument("at least one seed is required");

        return run_experiment(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
