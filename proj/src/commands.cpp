#include "ea/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "ea/eval.hpp"
#include "ea/synth.hpp"

namespace ea {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string metrics_to_string(const std::vector<MetricId>& m) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ",";
        out += to_string(m[i]);
    }
    return out;
}

std::vector<MetricId> parse_metric_list(const std::string& s) {
    std::vector<MetricId> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(metric_from_string(item));
    }
    if (out.empty()) throw ConfigError("metrics list is empty");
    return out;
}

void write_file(const fs::path& path, const std::string& body) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << body;
}

// ---------------------------------------------------------------------------
// configuration

struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    std::string comment;
};

const std::vector<std::pair<std::string, KeyHandler>>& config_keys() {
    auto dbl = [](double RunConfig::*field, std::string comment) {
        return KeyHandler{[field](RunConfig& c, const std::string& v) { c.*field = std::stod(v); },
                          [field](const RunConfig& c) { return fmt(c.*field); }, std::move(comment)};
    };
    auto integer = [](int RunConfig::*field, std::string comment) {
        return KeyHandler{[field](RunConfig& c, const std::string& v) { c.*field = std::stoi(v); },
                          [field](const RunConfig& c) { return std::to_string(c.*field); },
                          std::move(comment)};
    };
    auto str = [](std::string RunConfig::*field, std::string comment) {
        return KeyHandler{[field](RunConfig& c, const std::string& v) { c.*field = v; },
                          [field](const RunConfig& c) { return c.*field; }, std::move(comment)};
    };
    auto schema_str = [](std::string SchemaMap::*field, std::string comment) {
        return KeyHandler{
            [field](RunConfig& c, const std::string& v) { c.schema.*field = v; },
            [field](const RunConfig& c) { return c.schema.*field; }, std::move(comment)};
    };
    static const std::vector<std::pair<std::string, KeyHandler>> keys = {
        {"input_tracks", str(&RunConfig::input_tracks,
                             "naturalistic trajectory csv; empty = synthetic fallback corpus")},
        {"crash_tracks", str(&RunConfig::crash_tracks,
                             "crash corpus trajectory csv; empty = synthetic fallback corpus")},
        {"crash_index", str(&RunConfig::crash_index,
                            "crash case index csv: case_id,track_a,track_b,impact_time")},
        {"out_dir", str(&RunConfig::out_dir, "output directory")},
        {"col_id", schema_str(&SchemaMap::id, "trajectory column names")},
        {"col_time", schema_str(&SchemaMap::time, "")},
        {"col_frame", schema_str(&SchemaMap::frame, "alternative to col_time; needs frame_rate_hz")},
        {"col_x", schema_str(&SchemaMap::x, "")},
        {"col_y", schema_str(&SchemaMap::y, "")},
        {"col_vx", schema_str(&SchemaMap::vx, "")},
        {"col_vy", schema_str(&SchemaMap::vy, "")},
        {"col_speed", schema_str(&SchemaMap::speed, "")},
        {"col_heading", schema_str(&SchemaMap::heading, "")},
        {"col_yaw_rate", schema_str(&SchemaMap::yaw_rate, "")},
        {"col_length", schema_str(&SchemaMap::length, "")},
        {"col_width", schema_str(&SchemaMap::width, "")},
        {"col_class", schema_str(&SchemaMap::class_label, "")},
        {"frame_rate_hz",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.schema.frame_rate_hz = std::stod(v); },
                    [](const RunConfig& c) { return fmt(c.schema.frame_rate_hz); },
                    "rate for frame-indexed files"}},
        {"default_length",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.schema.default_length = std::stod(v); },
                    [](const RunConfig& c) { return fmt(c.schema.default_length); },
                    "footprint defaults when columns are absent"}},
        {"default_width",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.schema.default_width = std::stod(v); },
                    [](const RunConfig& c) { return fmt(c.schema.default_width); }, ""}},
        {"resample_hz", dbl(&RunConfig::resample_hz,
                            "resampling rate for episode work; 0 keeps native rates")},
        {"horizon_s",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.ea.horizon = std::stod(v); },
                    [](const RunConfig& c) { return fmt(c.ea.horizon); },
                    "interval of interest T (s)"}},
        {"stations",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.ea.stations = std::stoi(v); },
                    [](const RunConfig& c) { return std::to_string(c.ea.stations); },
                    "uniform radial stations for the CV barrier construction"}},
        {"ea_dt", KeyHandler{[](RunConfig& c, const std::string& v) { c.ea.numeric.dt = std::stod(v); },
                             [](const RunConfig& c) { return fmt(c.ea.numeric.dt); },
                             "time grid of the numeric EA (s)"}},
        {"a_max",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.ea.numeric.a_max = std::stod(v); },
                    [](const RunConfig& c) { return fmt(c.ea.numeric.a_max); },
                    "acceleration bound; beyond it EA is undefined (m/s^2)"}},
        {"coarse_step_deg",
         KeyHandler{[](RunConfig& c, const std::string& v) {
                        c.ea.numeric.coarse_step_rad = std::stod(v) * kPi / 180.0;
                    },
                    [](const RunConfig& c) { return fmt(c.ea.numeric.coarse_step_rad * 180.0 / kPi); },
                    "coarse directional sweep step (deg)"}},
        {"refine_levels",
         KeyHandler{[](RunConfig& c, const std::string& v) {
                        const auto nums = parse_double_list(v);
                        if (nums.size() % 2 != 0) throw ConfigError("refine_levels needs pairs");
                        c.ea.numeric.refine_levels.clear();
                        for (std::size_t i = 0; i < nums.size(); i += 2)
                            c.ea.numeric.refine_levels.push_back(
                                {nums[i] * kPi / 180.0, nums[i + 1] * kPi / 180.0});
                    },
                    [](const RunConfig& c) {
                        std::vector<double> nums;
                        for (const auto& l : c.ea.numeric.refine_levels) {
                            nums.push_back(l.half_window_rad * 180.0 / kPi);
                            nums.push_back(l.step_rad * 180.0 / kPi);
                        }
                        return join_doubles(nums);
                    },
                    "half-window,step pairs (deg) for local refinement"}},
        {"screen_time_threshold_s",
         dbl(&RunConfig::screen_time_threshold_s, "TTC/ACT/TTC2D screening threshold (s)")},
        {"screen_distance_m",
         dbl(&RunConfig::screen_distance_m, "bounding-box distance screening threshold (m)")},
        {"percentiles",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.percentiles = parse_double_list(v); },
                    [](const RunConfig& c) { return join_doubles(c.percentiles); },
                    "warning-threshold percentiles of the noncrash event maxima"}},
        {"lead_windows",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.lead_windows = parse_double_list(v); },
                    [](const RunConfig& c) { return join_doubles(c.lead_windows); },
                    "precrash window depths (s) for the separability experiment"}},
        {"folds", integer(&RunConfig::folds, "stratified folds for out-of-fold calibration")},
        {"bootstrap_n", integer(&RunConfig::bootstrap_n, "bootstrap replicates; 0 disables")},
        {"bootstrap_level", dbl(&RunConfig::bootstrap_level, "bootstrap interval level")},
        {"seed", KeyHandler{[](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); },
                            [](const RunConfig& c) { return std::to_string(c.seed); },
                            "seed for folds, bootstrap, and the synthetic corpus"}},
        {"metrics",
         KeyHandler{[](RunConfig& c, const std::string& v) { c.metrics = parse_metric_list(v); },
                    [](const RunConfig& c) { return metrics_to_string(c.metrics); },
                    "metric ids used by compute and the experiments"}},
        {"synth_noncrash", integer(&RunConfig::synth_noncrash, "fallback corpus sizes")},
        {"synth_crash", integer(&RunConfig::synth_crash, "")},
        {"synth_rate_hz", dbl(&RunConfig::synth_rate_hz, "")},
        {"bench_frames", integer(&RunConfig::bench_frames, "frame count for the bench command")},
    };
    return keys;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::stringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        bool found = false;
        for (const auto& [name, handler] : config_keys()) {
            if (name == key) {
                try {
                    handler.set(config, value);
                } catch (const ConfigError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw ConfigError("config key '" + key + "': " + e.what());
                }
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("unknown config key '" + key + "'");
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& config) {
    std::string out = "# resolved run configuration\n";
    for (const auto& [name, handler] : config_keys()) {
        if (!handler.comment.empty()) out += "# " + handler.comment + "\n";
        out += name + " = " + handler.get(config) + "\n";
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// corpus assembly (files or deterministic synthetic fallback)

struct CrashCase {
    std::string case_id;
    Track a;
    Track b;
    double impact_time;
};

std::string tracks_to_csv(std::span<const Track> tracks) {
    std::string out = "track_id,time,x,y,vx,vy,length,width,class\n";
    for (const Track& t : tracks) {
        for (const RoadUserState& s : t.frames) {
            const Vec2 v = s.velocity();
            out += t.track_id + "," + fmt(s.timestamp) + "," + fmt(s.position.x) + "," +
                   fmt(s.position.y) + "," + fmt(v.x) + "," + fmt(v.y) + "," + fmt(s.length) +
                   "," + fmt(s.width) + "," + to_string(s.class_label) + "\n";
        }
    }
    return out;
}

Track translated_track(Track t, Vec2 shift) {
    for (RoadUserState& s : t.frames) s.position += shift;
    return t;
}

ScenarioSpec nth_noncrash_spec(const RunConfig& config, int i) {
    ScenarioSpec spec;
    spec.seed = config.seed * 1000 + static_cast<std::uint64_t>(i);
    spec.rate_hz = config.synth_rate_hz;
    std::mt19937_64 rng(spec.seed ^ 0xabcdefULL);
    std::uniform_real_distribution<double> speed(5.0, 14.0);
    spec.speed_a = speed(rng);
    spec.speed_b = speed(rng);
    spec.lead_in_s = 4.0;
    switch (i % 5) {
        case 0:
            spec.template_id = ScenarioTemplate::Crossing;
            spec.outcome = ScenarioOutcome::Resolved;
            break;
        case 1:
            spec.template_id = ScenarioTemplate::Merging;
            spec.outcome = ScenarioOutcome::Resolved;
            break;
        case 2:
            spec.template_id = ScenarioTemplate::Crossing;
            spec.outcome = ScenarioOutcome::Benign;
            break;
        case 3:
            spec.template_id = ScenarioTemplate::PedestrianCrossing;
            spec.outcome = ScenarioOutcome::Resolved;
            spec.speed_b = 1.4;
            break;
        default:
            spec.template_id = ScenarioTemplate::HeadOn;
            spec.outcome = ScenarioOutcome::Resolved;
            spec.gap = spec.speed_a * 4.0 + spec.speed_b * 4.0;
            break;
    }
    return spec;
}

ScenarioSpec nth_crash_spec(const RunConfig& config, int i) {
    ScenarioSpec spec;
    spec.seed = config.seed * 2000 + static_cast<std::uint64_t>(i) + 7;
    spec.rate_hz = config.synth_rate_hz;
    spec.outcome = ScenarioOutcome::ForcedCrash;
    spec.lead_in_s = 3.6;
    std::mt19937_64 rng(spec.seed ^ 0x123456ULL);
    std::uniform_real_distribution<double> speed(5.0, 15.0);
    spec.speed_a = speed(rng);
    spec.speed_b = speed(rng);
    switch (i % 4) {
        case 0:
            spec.template_id = ScenarioTemplate::Crossing;
            break;
        case 1:
            spec.template_id = ScenarioTemplate::HeadOn;
            spec.gap = (spec.speed_a + spec.speed_b) * spec.lead_in_s;
            break;
        case 2:
            spec.template_id = ScenarioTemplate::Merging;
            break;
        default:
            spec.template_id = ScenarioTemplate::PedestrianCrossing;
            spec.speed_b = 1.5;
            break;
    }
    return spec;
}

std::vector<Track> synth_naturalistic(const RunConfig& config) {
    std::vector<Track> tracks;
    tracks.reserve(2 * config.synth_noncrash);
    for (int i = 0; i < config.synth_noncrash; ++i) {
        ScenarioSpec spec = nth_noncrash_spec(config, i);
        spec.id_a = "n" + std::to_string(i) + "_a";
        spec.id_b = "n" + std::to_string(i) + "_b";
        GeneratedScenario g = generate(spec);
        // keep scenario pairs far apart so cross-pair screening never fires
        const Vec2 shift{500.0 * (i + 1), 300.0 * ((i % 7) - 3)};
        tracks.push_back(translated_track(std::move(g.track_a), shift));
        tracks.push_back(translated_track(std::move(g.track_b), shift));
    }
    return tracks;
}

std::vector<CrashCase> synth_crashes(const RunConfig& config) {
    std::vector<CrashCase> cases;
    cases.reserve(config.synth_crash);
    for (int i = 0; i < config.synth_crash; ++i) {
        ScenarioSpec spec = nth_crash_spec(config, i);
        const std::string case_id = "c" + std::to_string(i);
        spec.id_a = case_id + "_a";
        spec.id_b = case_id + "_b";
        GeneratedScenario g = generate(spec);
        cases.push_back({case_id, std::move(g.track_a), std::move(g.track_b), *g.impact_time});
    }
    return cases;
}

std::vector<Track> load_naturalistic(const RunConfig& config) {
    if (config.input_tracks.empty()) return synth_naturalistic(config);
    IngestResult r = ingest(config.input_tracks, config.schema, config.resample_hz);
    if (r.rejected_rows > 0)
        std::cerr << "ingest: rejected " << r.rejected_rows << " rows\n";
    return std::move(r.tracks);
}

std::vector<CrashCase> load_crashes(const RunConfig& config) {
    if (config.crash_tracks.empty()) return synth_crashes(config);
    if (config.crash_index.empty())
        throw InputError("crash_tracks given without crash_index (case_id,track_a,track_b,impact_time)");
    IngestResult r = ingest(config.crash_tracks, config.schema, config.resample_hz);
    std::map<std::string, const Track*> by_id;
    for (const Track& t : r.tracks) by_id[t.track_id] = &t;

    std::ifstream in(config.crash_index);
    if (!in) throw InputError("cannot open crash index " + config.crash_index);
    std::string line;
    std::getline(in, line);  // header
    std::vector<CrashCase> cases;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string case_id, ta, tb, ti;
        std::getline(ss, case_id, ',');
        std::getline(ss, ta, ',');
        std::getline(ss, tb, ',');
        std::getline(ss, ti, ',');
        const auto ia = by_id.find(ta);
        const auto ib = by_id.find(tb);
        if (ia == by_id.end() || ib == by_id.end())
            throw InputError("crash index references unknown track ids: " + line);
        cases.push_back({case_id, *ia->second, *ib->second, std::stod(ti)});
    }
    return cases;
}

ScreeningParams screening_params(const RunConfig& config) {
    ScreeningParams p;
    p.time_threshold_s = config.screen_time_threshold_s;
    p.distance_threshold_m = config.screen_distance_m;
    p.ea = config.ea;
    p.metrics = config.metrics;
    return p;
}

json event_to_json(const ConflictEvent& ev) {
    json j;
    j["id_a"] = ev.id_a;
    j["id_b"] = ev.id_b;
    j["rate_hz"] = ev.rate_hz;
    j["t_begin"] = ev.times.front();
    j["t_end"] = ev.times.back();
    j["n_frames"] = ev.times.size();
    for (const auto& [id, m] : ev.event_max) j["event_max"][to_string(id)] = m;
    for (const auto& [id, series] : ev.series) {
        json arr = json::array();
        for (const RiskSample& s : series)
            arr.push_back(s.defined ? json(s.risk) : json(nullptr));
        j["series"][to_string(id)] = std::move(arr);
    }
    return j;
}

// crash series limited to valid precollision frames (t <= impact - 0.1)
struct CrashSeries {
    std::string case_id;
    double impact;
    std::vector<double> times;
    std::map<MetricId, std::vector<RiskSample>> series;
    ConflictEvent event;  // full event, for episode alignment
};

std::vector<CrashSeries> crash_series(const std::vector<CrashCase>& cases,
                                      const ScreeningParams& params) {
    std::vector<CrashSeries> out;
    out.reserve(cases.size());
    for (const CrashCase& c : cases) {
        CrashSeries cs;
        cs.case_id = c.case_id;
        cs.impact = c.impact_time;
        cs.event = compute_event(c.a, c.b, params);
        for (std::size_t k = 0; k < cs.event.times.size(); ++k) {
            if (cs.event.times[k] > c.impact_time - 0.1 + 1e-6) break;
            cs.times.push_back(cs.event.times[k]);
            for (const auto& [id, series] : cs.event.series)
                cs.series[id].push_back(series[k]);
        }
        if (!cs.times.empty()) out.push_back(std::move(cs));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

int cmd_synth(const RunConfig& config) {
    const auto tracks = synth_naturalistic(config);
    const auto crashes = synth_crashes(config);
    std::vector<Track> crash_tracks;
    std::string index = "case_id,track_a,track_b,impact_time\n";
    for (const CrashCase& c : crashes) {
        crash_tracks.push_back(c.a);
        crash_tracks.push_back(c.b);
        index += c.case_id + "," + c.a.track_id + "," + c.b.track_id + "," + fmt(c.impact_time) +
                 "\n";
    }
    const fs::path out(config.out_dir);
    write_file(out / "naturalistic.csv", tracks_to_csv(tracks));
    write_file(out / "crash_tracks.csv", tracks_to_csv(crash_tracks));
    write_file(out / "crash_index.csv", index);
    write_file(out / "resolved_config.txt", serialize_config(config));
    std::cout << "synth: " << tracks.size() / 2 << " noncrash pairs, " << crashes.size()
              << " crash cases -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_compute(const RunConfig& config) {
    const auto tracks = load_naturalistic(config);
    const ScreeningParams params = screening_params(config);

    std::string csv = "id_a,id_b,time";
    for (MetricId id : config.metrics)
        csv += std::string(",") + to_string(id) + "_raw," + to_string(id) + "_risk";
    csv += ",ea_cv_cv,ea_cv_ctrv,ea_ctrv_cv,ea_ctrv_ctrv,already_colliding,any_undefined\n";
    std::string timing = "id_a,id_b,time,elapsed_ms\n";

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = i + 1; j < tracks.size(); ++j) {
            const Track& a = tracks[i];
            const Track& b = tracks[j];
            const double t0 = std::max(a.frames.front().timestamp, b.frames.front().timestamp);
            const double t1 = std::min(a.frames.back().timestamp, b.frames.back().timestamp);
            if (t1 < t0) continue;
            ConflictEvent ev;
            try {
                ev = compute_event(a, b, params);
            } catch (const std::exception&) {
                continue;
            }
            for (std::size_t k = 0; k < ev.times.size(); ++k) {
                const RoadUserState& sa =
                    a.frames[static_cast<std::size_t>(std::llround((ev.times[k] - a.frames.front().timestamp) * a.rate_hz))];
                const RoadUserState& sb =
                    b.frames[static_cast<std::size_t>(std::llround((ev.times[k] - b.frames.front().timestamp) * b.rate_hz))];
                const auto start = std::chrono::steady_clock::now();
                const FrameMetrics fm = compute_frame_metrics(sa, sb, config.ea);
                const double ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
                csv += ev.id_a + "," + ev.id_b + "," + fmt(ev.times[k]);
                for (MetricId id : config.metrics) {
                    const RiskSample& s = fm.samples[metric_index(id)];
                    csv += "," + fmt(s.raw) + "," + (s.defined ? fmt(s.risk) : "nan");
                }
                for (std::size_t m = 0; m < 4; ++m) {
                    const auto& v = fm.ea_detail.per_model[m];
                    csv += std::string(",") + (v ? fmt(*v) : "nan");
                }
                csv += std::string(",") + (fm.ea_detail.already_colliding ? "1" : "0") + "," +
                       (fm.ea_detail.any_undefined ? "1" : "0") + "\n";
                timing += ev.id_a + "," + ev.id_b + "," + fmt(ev.times[k]) + "," + fmt(ms) + "\n";
            }
        }
    }
    const fs::path out(config.out_dir);
    write_file(out / "compute.csv", csv);
    write_file(out / "timing.csv", timing);  // wall-clock sidecar, non-deterministic
    write_file(out / "resolved_config.txt", serialize_config(config));
    std::cout << "compute: wrote " << (out / "compute.csv").string() << "\n";
    return kExitOk;
}

int cmd_screen(const RunConfig& config) {
    const auto tracks = load_naturalistic(config);
    const ScreeningParams params = screening_params(config);
    const auto events = screen_conflicts(tracks, params);

    json j;
    j["n_tracks"] = tracks.size();
    j["n_events"] = events.size();
    j["time_threshold_s"] = config.screen_time_threshold_s;
    j["distance_threshold_m"] = config.screen_distance_m;
    j["events"] = json::array();
    for (const ConflictEvent& ev : events) j["events"].push_back(event_to_json(ev));

    std::string summary = "n_tracks,n_pairs_checked,n_events\n";
    const std::size_t n = tracks.size();
    summary += std::to_string(n) + "," + std::to_string(n * (n - 1) / 2) + "," +
               std::to_string(events.size()) + "\n";

    const fs::path out(config.out_dir);
    write_file(out / "events.json", j.dump(1));
    write_file(out / "screen_summary.csv", summary);
    write_file(out / "resolved_config.txt", serialize_config(config));
    std::cout << "screen: " << events.size() << " events -> " << (out / "events.json").string()
              << "\n";
    return kExitOk;
}

namespace {

int experiment_separability(const RunConfig& config, const std::vector<ConflictEvent>& events,
                            const std::vector<CrashSeries>& crashes, const fs::path& out) {
    if (crashes.empty()) throw InputError("separability: crash corpus is empty");
    if (events.empty()) throw InputError("separability: no screened noncrash events");

    std::string csv =
        "window_s,metric,auprc,auroc,ks,tpr_fpr01,tpr_fpr05,tpr_fpr10,n_pos,n_neg\n";
    json j;
    for (double w : config.lead_windows) {
        for (MetricId id : config.metrics) {
            std::vector<double> neg;
            for (const ConflictEvent& ev : events) {
                const auto it = ev.event_max.find(id);
                if (it != ev.event_max.end()) neg.push_back(it->second);
            }
            std::vector<double> pos;
            for (const CrashSeries& c : crashes) {
                const auto it = c.series.find(id);
                if (it == c.series.end()) continue;
                for (std::size_t k = 0; k < c.times.size(); ++k) {
                    const double rel = c.times[k] - c.impact;
                    if (rel >= -w - 1e-6 && rel <= -0.1 + 1e-6 && it->second[k].defined)
                        pos.push_back(it->second[k].risk);
                }
            }
            if (pos.empty() || neg.empty()) continue;
            const SeparabilityReport rep = separability(pos, neg);
            csv += fmt(w) + "," + to_string(id) + "," + fmt(rep.auprc) + "," + fmt(rep.auroc) +
                   "," + fmt(rep.ks);
            for (const auto& [target, tpr] : rep.tpr_at_fpr) csv += "," + fmt(tpr);
            csv += "," + std::to_string(rep.n_pos) + "," + std::to_string(rep.n_neg) + "\n";
            json row = {{"auprc", rep.auprc}, {"auroc", rep.auroc},       {"ks", rep.ks},
                        {"n_pos", rep.n_pos}, {"n_neg", rep.n_neg}};
            for (const auto& [target, tpr] : rep.tpr_at_fpr)
                row["tpr_at_fpr"][fmt(target)] = tpr;
            j[fmt(w)][to_string(id)] = std::move(row);
        }
    }
    write_file(out / "separability.csv", csv);
    write_file(out / "separability.json", j.dump(1));
    std::cout << "experiment separability -> " << (out / "separability.csv").string() << "\n";
    return kExitOk;
}

int experiment_wlt(const RunConfig& config, const std::vector<ConflictEvent>& events,
                   const std::vector<CrashSeries>& crashes, const fs::path& out) {
    if (crashes.empty()) throw InputError("wlt: crash corpus is empty");
    if (events.empty()) throw InputError("wlt: no screened noncrash events for thresholds");

    std::string thr_csv = "metric,percentile,theta\n";
    std::string rec_csv = "case_id,metric,percentile,theta,wlt_s\n";
    std::string med_csv = "metric,percentile,median_wlt_s,n_cases\n";
    json j;
    for (MetricId id : config.metrics) {
        std::vector<double> maxima;
        for (const ConflictEvent& ev : events) {
            const auto it = ev.event_max.find(id);
            if (it != ev.event_max.end()) maxima.push_back(it->second);
        }
        if (maxima.empty()) continue;
        for (double p : config.percentiles) {
            const double theta = percentile_threshold(maxima, p);
            thr_csv += std::string(to_string(id)) + "," + fmt(p) + "," + fmt(theta) + "\n";
            std::vector<double> wlts;
            for (const CrashSeries& c : crashes) {
                const auto it = c.series.find(id);
                if (it == c.series.end()) continue;
                std::vector<double> risk;
                risk.reserve(it->second.size());
                for (const RiskSample& s : it->second)
                    risk.push_back(s.defined ? s.risk : -std::numeric_limits<double>::infinity());
                const double wlt = warning_lead_time(c.times, risk, theta, c.times.back());
                wlts.push_back(wlt);
                rec_csv += c.case_id + "," + to_string(id) + "," + fmt(p) + "," + fmt(theta) +
                           "," + fmt(wlt) + "\n";
            }
            std::sort(wlts.begin(), wlts.end());
            const double median =
                wlts.empty() ? 0.0
                             : (wlts.size() % 2 ? wlts[wlts.size() / 2]
                                                : 0.5 * (wlts[wlts.size() / 2 - 1] +
                                                         wlts[wlts.size() / 2]));
            med_csv += std::string(to_string(id)) + "," + fmt(p) + "," + fmt(median) + "," +
                       std::to_string(wlts.size()) + "\n";
            j[to_string(id)][fmt(p)] = {{"theta", theta}, {"median_wlt_s", median},
                                        {"n_cases", wlts.size()}};
        }
    }
    write_file(out / "wlt_thresholds.csv", thr_csv);
    write_file(out / "wlt_records.csv", rec_csv);
    write_file(out / "wlt_medians.csv", med_csv);
    write_file(out / "wlt.json", j.dump(1));
    std::cout << "experiment wlt -> " << (out / "wlt_medians.csv").string() << "\n";
    return kExitOk;
}

int experiment_info(const RunConfig& config, const std::vector<ConflictEvent>& events,
                    const std::vector<CrashSeries>& crashes, const fs::path& out) {
    if (crashes.empty()) throw InputError("info: crash corpus is empty");
    std::vector<Episode> episodes;
    std::size_t incomplete = 0;
    for (const ConflictEvent& ev : events) {
        const Episode ep = align_episode(ev, Outcome::NonCrash, std::nullopt,
                                         ev.id_a + "|" + ev.id_b);
        if (ep.complete)
            episodes.push_back(ep);
        else
            ++incomplete;
    }
    for (const CrashSeries& c : crashes) {
        const Episode ep = align_episode(c.event, Outcome::Crash, c.impact, c.case_id);
        if (ep.complete)
            episodes.push_back(ep);
        else
            ++incomplete;
    }
    const InfoReport rep = retained_information(episodes, config.metrics, config.folds,
                                                config.seed, config.bootstrap_n,
                                                config.bootstrap_level);

    std::string csv = "lead_time_s,h_bits,metric,residual_bits,retained_bits,ratio,ci_lo,ci_hi\n";
    for (std::size_t s = 0; s < rep.lead_times.size(); ++s) {
        for (const auto& [id, cells] : rep.methods) {
            const InfoCell& c = cells[s];
            csv += fmt(rep.lead_times[s]) + "," + fmt(rep.h_bits[s]) + "," + to_string(id) + "," +
                   fmt(c.residual_bits) + "," + fmt(c.retained_bits) + "," + fmt(c.ratio) + "," +
                   (c.ci_retained ? fmt(c.ci_retained->first) : "") + "," +
                   (c.ci_retained ? fmt(c.ci_retained->second) : "") + "\n";
        }
    }
    std::string inc_csv = "lead_time_s,baseline,ea_given_baseline_bits,baseline_given_ea_bits\n";
    for (std::size_t s = 0; s < rep.lead_times.size(); ++s) {
        for (const auto& [id, cells] : rep.incremental) {
            inc_csv += fmt(rep.lead_times[s]) + "," + to_string(id) + "," +
                       fmt(cells[s].ea_given_baseline) + "," + fmt(cells[s].baseline_given_ea) +
                       "\n";
        }
    }
    json j;
    j["seed"] = rep.seed;
    j["folds"] = rep.folds;
    j["n_episodes"] = episodes.size();
    j["n_incomplete"] = incomplete;
    j["notes"] = rep.notes;
    for (std::size_t s = 0; s < rep.lead_times.size(); ++s) {
        json slice;
        slice["lead_time_s"] = rep.lead_times[s];
        slice["h_bits"] = rep.h_bits[s];
        for (const auto& [id, cells] : rep.methods) {
            json cell = {{"residual_bits", cells[s].residual_bits},
                         {"retained_bits", cells[s].retained_bits},
                         {"ratio", cells[s].ratio}};
            if (cells[s].ci_retained)
                cell["ci_retained"] = {cells[s].ci_retained->first, cells[s].ci_retained->second};
            slice["methods"][to_string(id)] = std::move(cell);
        }
        for (const auto& [id, cells] : rep.incremental)
            slice["incremental"][to_string(id)] = {
                {"ea_given_baseline", cells[s].ea_given_baseline},
                {"baseline_given_ea", cells[s].baseline_given_ea}};
        j["slices"].push_back(std::move(slice));
    }
    write_file(out / "info.csv", csv);
    write_file(out / "info_incremental.csv", inc_csv);
    write_file(out / "info.json", j.dump(1));
    std::cout << "experiment info -> " << (out / "info.csv").string() << "\n";
    return kExitOk;
}

}  // namespace

int cmd_experiment(const RunConfig& config, const std::string& which) {
    const auto tracks = load_naturalistic(config);
    const ScreeningParams params = screening_params(config);
    const auto events = screen_conflicts(tracks, params);
    const auto crashes = crash_series(load_crashes(config), params);
    const fs::path out(config.out_dir);
    write_file(out / "resolved_config.txt", serialize_config(config));
    if (which == "separability") return experiment_separability(config, events, crashes, out);
    if (which == "wlt") return experiment_wlt(config, events, crashes, out);
    if (which == "info") return experiment_info(config, events, crashes, out);
    throw ConfigError("unknown experiment '" + which + "' (separability|wlt|info)");
}

int cmd_bench(const RunConfig& config) {
    // mixed suite: conflict-bound and benign frames, deterministic from the seed
    std::vector<std::pair<RoadUserState, RoadUserState>> frames;
    frames.reserve(config.bench_frames);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> speed(2.0, 18.0);
    std::uniform_real_distribution<double> tta(0.8, 5.0);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);
    std::uniform_real_distribution<double> yaw(-0.2, 0.2);
    while (frames.size() < static_cast<std::size_t>(config.bench_frames)) {
        RoadUserState a, b;
        const bool conflict = frames.size() % 5 < 2;
        a.speed = speed(rng);
        b.speed = speed(rng);
        a.heading = ang(rng);
        b.heading = ang(rng);
        a.yaw_rate = yaw(rng);
        b.yaw_rate = yaw(rng);
        const double t = tta(rng);
        if (conflict) {
            a.position = -a.speed * t * heading_dir(a.heading);
            b.position = -b.speed * t * heading_dir(b.heading);
        } else {
            a.position = {offset(rng), offset(rng)};
            b.position = {offset(rng) + 60.0, offset(rng) + 60.0};
        }
        if (obb_overlap(a.footprint(), b.footprint())) continue;
        frames.emplace_back(a, b);
    }
    const BenchmarkReport rep = benchmark(frames, config.ea);
    json j = {{"frames", frames.size()}, {"mean_ms", rep.mean_ms}, {"p95_ms", rep.p95_ms},
              {"horizon_s", config.ea.horizon}};
    const fs::path out(config.out_dir);
    write_file(out / "bench.json", j.dump(1));
    write_file(out / "resolved_config.txt", serialize_config(config));
    std::cout << "bench: mean " << fmt(rep.mean_ms) << " ms/frame, p95 " << fmt(rep.p95_ms)
              << " ms over " << frames.size() << " frames\n";
    return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Evasive-acceleration surrogate safety toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string metric_override;
    std::int64_t seed_override = -1;
    std::string experiment_which = "separability";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file (key = value)");
        cmd->add_option("--out", out_override, "output directory override");
        cmd->add_option("--seed", seed_override, "seed override");
        cmd->add_option("--metric", metric_override, "comma-separated metric list override");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    CLI::App* compute = app.add_subcommand("compute", "per-frame metrics for all track pairs");
    CLI::App* screen = app.add_subcommand("screen", "potential-conflict screening");
    CLI::App* experiment = app.add_subcommand("experiment", "run a validation experiment");
    experiment->add_option("which", experiment_which, "separability|wlt|info")->required();
    CLI::App* bench = app.add_subcommand("bench", "per-frame runtime benchmark");
    for (CLI::App* c : {synth, compute, screen, experiment, bench}) add_common(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!out_override.empty()) config.out_dir = out_override;
        if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
        if (!metric_override.empty()) config.metrics = parse_metric_list(metric_override);

        if (synth->parsed()) return cmd_synth(config);
        if (compute->parsed()) return cmd_compute(config);
        if (screen->parsed()) return cmd_screen(config);
        if (experiment->parsed()) return cmd_experiment(config, experiment_which);
        if (bench->parsed()) return cmd_bench(config);
        return kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

}  // namespace ea
