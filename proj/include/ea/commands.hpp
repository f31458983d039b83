#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ea/data.hpp"
#include "ea/ea_core.hpp"

namespace ea {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitConfigError = 3;

/// Flat key = value run configuration. Defaults are the paper-anchored
/// values; every run serializes its resolved configuration beside its
/// outputs.
struct RunConfig {
    // io
    std::string input_tracks;   // naturalistic tracks csv; empty -> synthetic fallback
    std::string crash_tracks;   // crash corpus tracks csv; empty -> synthetic fallback
    std::string crash_index;    // csv: case_id,track_a,track_b,impact_time
    std::string out_dir = "out";
    // schema
    SchemaMap schema;
    double resample_hz = 10.0;
    // ea
    EaConfig ea;
    // screening
    double screen_time_threshold_s = 5.0;
    double screen_distance_m = 50.0;
    // experiments
    std::vector<double> percentiles = {90.0, 95.0, 99.0, 99.5};
    std::vector<double> lead_windows = {0.5, 1.0, 1.5, 2.0};
    int folds = 5;
    int bootstrap_n = 200;
    double bootstrap_level = 0.95;
    std::uint64_t seed = 20260810;
    std::vector<MetricId> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    // synthetic fallback corpus
    int synth_noncrash = 60;
    int synth_crash = 24;
    double synth_rate_hz = 10.0;
    // bench
    int bench_frames = 1000;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
std::string serialize_config(const RunConfig& config);

int cmd_synth(const RunConfig& config);
int cmd_compute(const RunConfig& config);
int cmd_screen(const RunConfig& config);
int cmd_experiment(const RunConfig& config, const std::string& which);
int cmd_bench(const RunConfig& config);

/// CLI entry: subcommands compute, screen, experiment, bench, synth.
int run_cli(int argc, const char* const* argv);

}  // namespace ea
