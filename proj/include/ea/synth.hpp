#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ea/data.hpp"
#include "ea/motion.hpp"

namespace ea {

enum class ScenarioTemplate { HeadOn, Crossing, Merging, PedestrianCrossing, ParallelBenign };
enum class ScenarioOutcome { ForcedCrash, Resolved, Benign };

struct ScenarioSpec {
    ScenarioTemplate template_id = ScenarioTemplate::Crossing;
    ScenarioOutcome outcome = ScenarioOutcome::ForcedCrash;
    double speed_a = 10.0;
    double speed_b = 10.0;
    double crossing_angle = 1.5707963267948966;  // rad, crossing/merging approach angle
    double lateral_offset = 3.5;                 // m, benign lane offset
    double gap = 30.0;                           // m, head-on footprint gap
    double lead_in_s = 4.0;                      // s from track start to the nominal conflict
    double post_s = 1.0;                         // s of track beyond the conflict moment
    double rate_hz = 10.0;
    std::uint64_t seed = 0;
    std::string id_a = "A";
    std::string id_b = "B";
};

struct GeneratedScenario {
    Track track_a;
    Track track_b;
    std::optional<double> impact_time;  // absolute track time; set for forced-crash specs
};

/// Deterministic two-user scenario. Forced-crash templates guarantee footprint
/// overlap; impact_time is located by scan + bisection on the exact footprints.
GeneratedScenario generate(const ScenarioSpec& spec);

}  // namespace ea
