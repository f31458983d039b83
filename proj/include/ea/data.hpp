#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ea/metrics.hpp"
#include "ea/motion.hpp"

namespace ea {

enum class YawRateSource { Column, HeadingDifference };

struct Track {
    std::string track_id;
    RoadUserClass class_label = RoadUserClass::Car;
    std::vector<RoadUserState> frames;  // strictly increasing, uniform timestamps
    double rate_hz = 0.0;
    YawRateSource yaw_source = YawRateSource::HeadingDifference;
};

/// Column mapping for delimited trajectory files. Mandatory: id, time or
/// frame, x, y, and either (vx, vy) or (speed, heading).
struct SchemaMap {
    std::string id = "track_id";
    std::string time = "time";
    std::string frame;  // alternative to time; needs frame_rate_hz
    std::string x = "x";
    std::string y = "y";
    std::string vx = "vx";
    std::string vy = "vy";
    std::string speed;
    std::string heading;
    std::string yaw_rate;
    std::string length = "length";
    std::string width = "width";
    std::string class_label = "class";
    double frame_rate_hz = 0.0;
    double default_length = 4.5;
    double default_width = 1.8;
    char delimiter = ',';
};

struct IngestResult {
    std::vector<Track> tracks;
    std::size_t rejected_rows = 0;
};

/// Read tracks from a delimited text file with a header row. Rows with NaN
/// coordinates or non-monotone timestamps are rejected and counted; a missing
/// mandatory column throws. resample_hz > 0 resamples by linear interpolation.
IngestResult ingest(const std::string& path, const SchemaMap& schema, double resample_hz = 0.0);

/// Same, but from an in-memory buffer (used by tests and the generator round-trip).
IngestResult ingest_text(const std::string& text, const SchemaMap& schema,
                         double resample_hz = 0.0);

struct ScreeningParams {
    double time_threshold_s = 5.0;    // TTC / ACT / TTC2D criterion
    double distance_threshold_m = 50.0;
    EaConfig ea;
    std::vector<MetricId> metrics{kAllMetrics.begin(), kAllMetrics.end()};
};

struct ConflictEvent {
    std::string id_a;
    std::string id_b;
    double rate_hz = 0.0;
    std::vector<double> times;  // co-presence frames, absolute seconds
    std::map<MetricId, std::vector<RiskSample>> series;
    std::map<MetricId, double> event_max;  // max over defined oriented risks
};

/// Per-frame metric series over the co-presence window of two tracks
/// (no screening criteria applied).
ConflictEvent compute_event(const Track& a, const Track& b, const ScreeningParams& params);

/// Potential-conflict screening over all track pairs: co-presence, at least
/// one frame with TTC/ACT/TTC2D at or below the time threshold, and at least
/// one frame with bounding-box distance at or below the distance threshold.
std::vector<ConflictEvent> screen_conflicts(std::span<const Track> tracks,
                                            const ScreeningParams& params);

enum class Outcome { Crash, NonCrash };

inline constexpr std::size_t kLeadGridSize = 30;
/// Lead-time grid value for index i: -3.0 + 0.1 * i, up to -0.1 s.
double lead_time_at(std::size_t i);
inline constexpr double kLeadTolerance = 0.03;  // s, nearest-frame matching

struct Episode {
    Outcome outcome = Outcome::NonCrash;
    double anchor_time = 0.0;
    std::string case_id;
    // per grid point: oriented risk per metric, empty when no frame is close enough
    std::array<std::optional<std::array<double, kMetricCount>>, kLeadGridSize> samples;
    bool complete = false;
};

/// Align an event to the lead-time grid. Crash episodes anchor at the given
/// impact time (required); noncrash episodes anchor at the earliest minimum
/// of the bounding-box distance (impact_time must be absent).
Episode align_episode(const ConflictEvent& event, Outcome outcome,
                      std::optional<double> impact_time, const std::string& case_id);

}  // namespace ea
