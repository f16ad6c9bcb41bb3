#include "senmux/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace senmux {

using json = nlohmann::json;

std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Constants: return "constants";
    case ExperimentKind::Apps: return "apps";
    case ExperimentKind::Jitter: return "jitter";
    }
    return "?";
}

std::optional<ExperimentKind> experiment_from_string(const std::string& name) {
    if (name == "sweep") return ExperimentKind::Sweep;
    if (name == "constants") return ExperimentKind::Constants;
    if (name == "apps") return ExperimentKind::Apps;
    if (name == "jitter") return ExperimentKind::Jitter;
    return std::nullopt;
}

const std::vector<std::uint64_t>& default_sweep_grid() {
    static const std::vector<std::uint64_t> grid{25000,  50000,  75000,  100000, 150000,
                                                 200000, 250000, 300000, 350000};
    return grid;
}

namespace {

std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(std::string("cannot open ") + what + ": " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double median_double(std::vector<double> values) {
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1)
        return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    return seed ^ static_cast<std::uint64_t>(trial);
}

void require_trials(const ExperimentConfig& config) {
    if (config.trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    if (config.seeds.empty())
        throw std::invalid_argument("at least one seed is required");
}

} // namespace

ExperimentConfig load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path, "config file"));
    } catch (const json::exception& e) {
        throw ParseError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object())
        throw SchemaViolationError("config file must hold a JSON object");

    ExperimentConfig cfg;
    if (j.contains("kind")) {
        auto kind = experiment_from_string(j["kind"].get<std::string>());
        if (!kind)
            throw SchemaViolationError("config: unknown experiment kind '" +
                                       j["kind"].get<std::string>() + "'");
        cfg.kind = *kind;
    }
    cfg.profile = j.value("profile", cfg.profile);
    if (j.contains("policy")) {
        auto policy = policy_from_string(j["policy"].get<std::string>());
        if (!policy)
            throw SchemaViolationError("config: unknown policy '" +
                                       j["policy"].get<std::string>() + "'");
        cfg.policy = *policy;
    }
    if (j.contains("seeds")) {
        cfg.seeds.clear();
        for (const json& s : j["seeds"])
            cfg.seeds.push_back(s.get<std::uint64_t>());
        if (cfg.seeds.empty())
            throw SchemaViolationError("config: seeds must not be empty");
    } else if (j.contains("seed")) {
        cfg.seeds = {j["seed"].get<std::uint64_t>()};
    }
    cfg.trials = j.value("trials", cfg.trials);
    if (j.contains("grid_us")) {
        cfg.grid_us.clear();
        for (const json& w : j["grid_us"])
            cfg.grid_us.push_back(w.get<std::uint64_t>());
    }
    if (j.contains("bits")) {
        if (j["bits"].is_number()) {
            cfg.bits.min = cfg.bits.max = j["bits"].get<std::uint32_t>();
        } else {
            cfg.bits.min = j["bits"].value("min", cfg.bits.min);
            cfg.bits.max = j["bits"].value("max", cfg.bits.max);
        }
    }
    cfg.out_path = j.value("out", cfg.out_path);
    cfg.params_path = j.value("params", cfg.params_path);
    cfg.db_path = j.value("db", cfg.db_path);
    cfg.fail_threshold = j.value("fail_threshold", cfg.fail_threshold);
    cfg.include_indistinguishable =
        j.value("include_indistinguishable", cfg.include_indistinguishable);
    if (cfg.bits.min < 1 || cfg.bits.min > cfg.bits.max)
        throw SchemaViolationError("config: bits range must satisfy 1 <= min <= max");
    return cfg;
}

ChannelParams ChannelParamSet::channel_params(std::uint64_t pulse_width_us,
                                              double epsilon) const {
    ChannelParams p;
    p.sensor = sensor;
    p.t_c_us = t_c_us;
    p.t_tr_us = t_tr_us;
    p.t_sync_us = t_sync_us;
    p.t_end_us = t_end_us;
    p.pulse_width_us = pulse_width_us;
    p.epsilon = epsilon;
    return p;
}

std::vector<ChannelParamSet> parse_channel_params(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError("channel parameter file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("sets") || !j["sets"].is_array())
        throw SchemaViolationError("channel parameter file needs a 'sets' array");
    std::vector<ChannelParamSet> out;
    for (const json& entry : j["sets"]) {
        ChannelParamSet set;
        if (!entry.contains("device") || !entry.contains("sensor"))
            throw SchemaViolationError("channel parameter set needs device and sensor");
        set.device = entry["device"].get<std::string>();
        auto sensor = sensor_from_string(entry["sensor"].get<std::string>());
        if (!sensor)
            throw SchemaViolationError("channel parameter set: unknown sensor '" +
                                       entry["sensor"].get<std::string>() + "'");
        set.sensor = *sensor;
        for (const char* key : {"t_c_us", "t_tr_us", "t_sync_us", "t_end_us"}) {
            if (!entry.contains(key) || !entry[key].is_number_unsigned() ||
                entry[key].get<std::uint64_t>() == 0)
                throw SchemaViolationError(std::string("channel parameter set for ") +
                                           set.device + ": " + key +
                                           " must be a positive integer");
        }
        set.t_c_us = entry["t_c_us"].get<std::uint64_t>();
        set.t_tr_us = entry["t_tr_us"].get<std::uint64_t>();
        set.t_sync_us = entry["t_sync_us"].get<std::uint64_t>();
        set.t_end_us = entry["t_end_us"].get<std::uint64_t>();
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<ChannelParamSet> load_channel_params_file(const std::string& path) {
    return parse_channel_params(slurp(path, "channel parameter file"));
}

std::vector<ChannelParamSet> channel_params_for(const std::string& device,
                                                const std::string& path) {
    std::string file = path.empty() ? default_data_dir() + "/channel_params.json" : path;
    std::vector<ChannelParamSet> all = load_channel_params_file(file);
    std::vector<ChannelParamSet> out;
    for (ChannelParamSet& set : all) {
        if (set.device == device)
            out.push_back(std::move(set));
    }
    return out;
}

SweepResult run_sweep(const DeviceProfile& profile, const std::vector<ChannelParamSet>& sets,
                      const ExperimentConfig& config) {
    require_trials(config);
    if (config.bits.min < 1 || config.bits.min > config.bits.max)
        throw std::invalid_argument("bit length range must satisfy 1 <= min <= max");
    const std::vector<std::uint64_t>& grid =
        config.grid_us.empty() ? default_sweep_grid() : config.grid_us;
    if (grid.empty())
        throw std::invalid_argument("sweep grid must not be empty");

    SweepResult result;
    for (const ChannelParamSet& set : sets) {
        for (std::uint64_t w : grid) {
            // Below the pulse floor a window holds fewer carrier periods than
            // the gap majority needs, so the decode is noise; the reliability
            // curve is only defined where the channel can operate.
            if (!meets_pulse_floor(set.channel_params(w)))
                continue;
            SweepRow row;
            row.device = set.device;
            row.sensor = set.sensor;
            row.pulse_width_us = w;

            double edit_sum = 0.0;
            std::vector<double> rates;
            for (std::uint64_t seed : config.seeds) {
                for (int t = 0; t < config.trials; ++t) {
                    std::uint64_t ts = trial_seed(seed, t);
                    Rng bits_rng = Rng(ts).substream(0x626974736c656eULL);
                    std::uint32_t len =
                        config.bits.min == config.bits.max
                            ? config.bits.min
                            : config.bits.min +
                                  static_cast<std::uint32_t>(bits_rng.below(
                                      config.bits.max - config.bits.min + 1));
                    std::string sent = random_bits(len, bits_rng);

                    SweepTrialRow trial;
                    trial.device = set.device;
                    trial.sensor = set.sensor;
                    trial.pulse_width_us = w;
                    trial.trial = t;
                    trial.seed = ts;
                    trial.sent_bits = sent.size();
                    try {
                        TransmissionReport report = run_channel(
                            sent, set.channel_params(w), profile, config.policy, ts);
                        trial.success = true;
                        trial.edit_dist = report.edit_dist;
                        trial.bit_rate_bps = report.bit_rate_bps;
                        rates.push_back(report.bit_rate_bps);
                    } catch (const ChannelFailureError&) {
                        // A transmission that never completed loses every bit.
                        trial.success = false;
                        trial.edit_dist = sent.size();
                        ++row.failures;
                    }
                    edit_sum += static_cast<double>(trial.edit_dist);
                    ++row.trials;
                    result.raw.push_back(std::move(trial));
                }
            }
            row.mean_edit_distance = row.trials ? edit_sum / row.trials : 0.0;
            row.median_bit_rate_bps = median_double(rates);
            result.total_failures += row.failures;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

ConstantsResult run_constants(const DeviceProfile& profile, const ExperimentConfig& config) {
    require_trials(config);
    ConstantsResult result;
    for (Sensor sensor : profile.sensor_list()) {
        const SensorSpec& spec = profile.spec(sensor);
        // A single-frequency responder reveals nothing about any request, so
        // its cells are not part of the experiment at all.
        if (spec.response.kind == ResponseModel::Kind::SingleFrequency)
            continue;
        for (SdkRate rate : kAllSdkRates) {
            bool distinguishable = rate_distinguishable(profile, sensor, rate);
            if (!distinguishable && !config.include_indistinguishable)
                continue;

            ConstantsCell cell;
            cell.device = profile.name;
            cell.sensor = sensor;
            cell.rate = rate;
            cell.distinguishable = distinguishable;

            double latency_sum = 0.0;
            double period_sum = 0.0;
            for (std::uint64_t seed : config.seeds) {
                for (int t = 0; t < config.trials; ++t) {
                    std::uint64_t ts = trial_seed(seed, t);
                    ScenarioConfig sc;
                    sc.combo = {{sensor, rate, 0}};
                    sc.seed = ts;
                    ScenarioResult run = run_scenario(profile, sc);

                    ConstantsTrialRow trial;
                    trial.device = profile.name;
                    trial.sensor = sensor;
                    trial.rate = rate;
                    trial.trial = t;
                    trial.seed = ts;
                    for (const DetectionEvent& d : run.detections) {
                        if (d.sensor != sensor)
                            continue;
                        if (!trial.detected) {
                            trial.detected = true;
                            trial.period_us = d.period_us;
                            period_sum += static_cast<double>(d.period_us);
                            ++cell.detections;
                        }
                        if (!trial.label_correct && d.constant && *d.constant == rate) {
                            trial.label_correct = true;
                            trial.latency_us = span_us(run.registered_at, d.at);
                            latency_sum += static_cast<double>(trial.latency_us);
                            ++cell.label_correct;
                        }
                    }
                    ++cell.trials;
                    result.raw.push_back(trial);
                }
            }
            cell.mean_latency_ms =
                cell.label_correct ? latency_sum / cell.label_correct / 1000.0 : 0.0;
            cell.mean_period_us = cell.detections ? period_sum / cell.detections : 0.0;
            result.cells.push_back(cell);
        }
    }
    return result;
}

AppsResult run_apps(const AppDb& db, const DeviceProfile& profile,
                    const ExperimentConfig& config) {
    if (config.seeds.empty())
        throw std::invalid_argument("at least one seed is required");
    AppsResult result;
    std::uint64_t seed = config.seeds.front();
    int index = 0;
    for (const AppRecord& rec : db.records) {
        ScenarioConfig sc;
        for (const ComboEntry& e : rec.combo)
            sc.combo.push_back({e.sensor, e.constant, e.period_us});
        sc.seed = trial_seed(seed, index++);
        ScenarioResult run = run_scenario(profile, sc);
        MatchResult match = match_apps(db, run.detections);

        AppRow row;
        row.name = rec.name;
        row.category = rec.category;
        row.combo_size = rec.combo.size();
        row.detections = run.detections.size();
        row.candidates = match.candidates.size();
        row.exact = match.exact.size();
        row.detected = std::find(match.candidates.begin(), match.candidates.end(),
                                 rec.name) != match.candidates.end();
        row.unique = match.unique;
        if (row.detected)
            ++result.detected_total;
        if (row.unique)
            ++result.unique_total;
        result.rows.push_back(std::move(row));

        for (const DetectionEvent& d : run.detections)
            result.raw.push_back(
                {rec.name, d.sensor, d.constant, d.period_us, span_us(run.registered_at, d.at)});
    }
    result.conflicting_total = result.detected_total - result.unique_total;
    return result;
}

JitterResult run_jitter(const DeviceProfile& profile, const ExperimentConfig& config,
                        std::size_t gaps_per_sensor) {
    if (config.seeds.empty())
        throw std::invalid_argument("at least one seed is required");
    Engine engine;
    SensorStack::Options options;
    options.policy = config.policy;
    SensorStack stack(engine, profile, options, config.seeds.front());

    std::map<Sensor, std::vector<std::uint64_t>> collected;
    stack.set_gap_probe([&](Sensor s, std::uint64_t gap) {
        auto it = collected.find(s);
        if (it != collected.end() && it->second.size() < gaps_per_sensor)
            it->second.push_back(gap);
    });

    std::uint64_t horizon_us = 0;
    std::vector<Sensor> sensors = profile.sensor_list();
    for (Sensor s : sensors) {
        collected[s];
        stack.register_listener("probe", s, profile.spec(s).min_period_us);
        std::uint64_t base = stack.effective_period(s);
        horizon_us = std::max(horizon_us,
                              (static_cast<std::uint64_t>(gaps_per_sensor) + 16) * base * 6 / 5);
    }

    SimTime t{0};
    while (true) {
        bool done = true;
        for (Sensor s : sensors)
            done = done && collected[s].size() >= gaps_per_sensor;
        if (done)
            break;
        if (t.us >= horizon_us)
            throw std::logic_error("gap collection did not finish within the horizon");
        t = advance(t, 1'000'000);
        engine.run_until(t);
    }

    JitterResult result;
    for (Sensor s : sensors) {
        const std::vector<std::uint64_t>& gaps = collected[s];
        JitterRow row;
        row.device = profile.name;
        row.sensor = s;
        row.base_us = stack.effective_period(s);
        row.band = band_for_request(profile.spec(s), profile.spec(s).min_period_us);
        row.count = gaps.size();
        double sum = 0.0;
        for (std::uint64_t g : gaps)
            sum += static_cast<double>(g);
        row.mean_us = gaps.empty() ? 0.0 : sum / static_cast<double>(gaps.size());
        double sq = 0.0;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            double d = static_cast<double>(gaps[i]) - row.mean_us;
            sq += d * d;
            if (gaps[i] < row.band.lo_us || gaps[i] > row.band.hi_us)
                ++row.violations;
            result.raw.push_back({s, i, gaps[i]});
        }
        row.std_us = gaps.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(gaps.size()));
        row.rel_std = row.mean_us > 0.0 ? row.std_us / row.mean_us : 0.0;
        result.rows.push_back(row);
    }
    return result;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc())
        return "0";
    return std::string(buf, ptr);
}

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos)
        return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::ofstream open_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    return out;
}

} // namespace

std::string raw_output_path(const std::string& out_path) {
    std::filesystem::path p(out_path);
    if (p.has_extension()) {
        std::filesystem::path stem = p.parent_path() / p.stem();
        return stem.string() + ".raw" + p.extension().string();
    }
    return out_path + ".raw.csv";
}

void write_sweep_csv(const std::string& out_path, const SweepResult& result) {
    std::ofstream out = open_out(out_path);
    out << "device,sensor,pulse_width_us,trials,failures,mean_edit_distance,"
           "median_bit_rate_bps\n";
    for (const SweepRow& r : result.rows) {
        out << csv_field(r.device) << ',' << to_string(r.sensor) << ',' << r.pulse_width_us
            << ',' << r.trials << ',' << r.failures << ',' << format_double(r.mean_edit_distance)
            << ',' << format_double(r.median_bit_rate_bps) << '\n';
    }
    std::ofstream raw = open_out(raw_output_path(out_path));
    raw << "device,sensor,pulse_width_us,trial,seed,sent_bits,success,edit_distance,"
           "bit_rate_bps\n";
    for (const SweepTrialRow& r : result.raw) {
        raw << csv_field(r.device) << ',' << to_string(r.sensor) << ',' << r.pulse_width_us
            << ',' << r.trial << ',' << r.seed << ',' << r.sent_bits << ','
            << (r.success ? 1 : 0) << ',' << r.edit_dist << ','
            << format_double(r.bit_rate_bps) << '\n';
    }
}

void write_constants_csv(const std::string& out_path, const ConstantsResult& result) {
    std::ofstream out = open_out(out_path);
    out << "device,sensor,rate,distinguishable,trials,detections,label_correct,"
           "detection_rate,mean_latency_ms,mean_period_us\n";
    for (const ConstantsCell& c : result.cells) {
        double rate = c.trials ? static_cast<double>(c.label_correct) / c.trials : 0.0;
        out << csv_field(c.device) << ',' << to_string(c.sensor) << ',' << to_string(c.rate)
            << ',' << (c.distinguishable ? 1 : 0) << ',' << c.trials << ',' << c.detections
            << ',' << c.label_correct << ',' << format_double(rate) << ','
            << format_double(c.mean_latency_ms) << ',' << format_double(c.mean_period_us)
            << '\n';
    }
    std::ofstream raw = open_out(raw_output_path(out_path));
    raw << "device,sensor,rate,trial,seed,detected,label_correct,period_us,latency_us\n";
    for (const ConstantsTrialRow& r : result.raw) {
        raw << csv_field(r.device) << ',' << to_string(r.sensor) << ',' << to_string(r.rate)
            << ',' << r.trial << ',' << r.seed << ',' << (r.detected ? 1 : 0) << ','
            << (r.label_correct ? 1 : 0) << ',' << r.period_us << ',' << r.latency_us << '\n';
    }
}

void write_apps_csv(const std::string& out_path, const AppsResult& result) {
    std::ofstream out = open_out(out_path);
    out << "app,category,combo_size,detections,candidates,exact,detected,unique\n";
    for (const AppRow& r : result.rows) {
        out << csv_field(r.name) << ',' << csv_field(r.category) << ',' << r.combo_size << ','
            << r.detections << ',' << r.candidates << ',' << r.exact << ','
            << (r.detected ? 1 : 0) << ',' << (r.unique ? 1 : 0) << '\n';
    }
    std::ofstream raw = open_out(raw_output_path(out_path));
    raw << "app,sensor,constant,period_us,latency_us\n";
    for (const AppTrialRow& r : result.raw) {
        raw << csv_field(r.app) << ',' << to_string(r.sensor) << ','
            << (r.constant ? to_string(*r.constant) : std::string()) << ',' << r.period_us
            << ',' << r.latency_us << '\n';
    }
}

void write_jitter_csv(const std::string& out_path, const JitterResult& result) {
    std::ofstream out = open_out(out_path);
    out << "device,sensor,base_us,band_lo_us,band_hi_us,count,mean_us,std_us,rel_std,"
           "violations\n";
    for (const JitterRow& r : result.rows) {
        out << csv_field(r.device) << ',' << to_string(r.sensor) << ',' << r.base_us << ','
            << r.band.lo_us << ',' << r.band.hi_us << ',' << r.count << ','
            << format_double(r.mean_us) << ',' << format_double(r.std_us) << ','
            << format_double(r.rel_std) << ',' << r.violations << '\n';
    }
    std::ofstream raw = open_out(raw_output_path(out_path));
    raw << "sensor,index,gap_us\n";
    for (const JitterGapRow& r : result.raw)
        raw << to_string(r.sensor) << ',' << r.index << ',' << r.gap_us << '\n';
}

} // namespace senmux
