#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ea/data.hpp"
#include "ea/synth.hpp"

using namespace ea;

namespace {

const char* kTinyCsv =
    "track_id,time,x,y,vx,vy,length,width,class\n"
    "t1,0.0,0,0,3,4,4.2,1.8,car\n"
    "t1,0.1,0.3,0.4,3,4,4.2,1.8,car\n"
    "t1,0.2,0.6,0.8,3,4,4.2,1.8,car\n";

ScreeningParams fast_params() {
    ScreeningParams p;
    p.metrics = {MetricId::TTC, MetricId::ACT, MetricId::TTC2D, MetricId::BBOX_DIST};
    return p;
}

}  // namespace

TEST_CASE("ingest: three-row synthetic file") {
    const auto r = ingest_text(kTinyCsv, SchemaMap{});
    REQUIRE(r.tracks.size() == 1);
    const Track& t = r.tracks[0];
    CHECK(t.frames.size() == 3);
    CHECK(t.rate_hz == doctest::Approx(10.0));
    CHECK(r.rejected_rows == 0);
    // (vx, vy) = (3, 4) -> speed 5, heading atan2(4, 3)
    CHECK(t.frames[0].speed == doctest::Approx(5.0));
    CHECK(t.frames[0].heading == doctest::Approx(std::atan2(4.0, 3.0)));
    CHECK(t.frames[0].length == doctest::Approx(4.2));
    CHECK(t.class_label == RoadUserClass::Car);
    CHECK(t.yaw_source == YawRateSource::HeadingDifference);
}

TEST_CASE("ingest: missing mandatory column throws") {
    SchemaMap schema;
    schema.x = "missing_x";
    CHECK_THROWS(ingest_text(kTinyCsv, schema));
}

TEST_CASE("ingest: bad rows rejected with count") {
    const std::string csv =
        "track_id,time,x,y,vx,vy\n"
        "t1,0.0,0,0,1,0\n"
        "t1,0.1,nan,0,1,0\n"        // NaN coordinate
        "t1,0.1,0.2,0,1,0\n"
        "t1,0.05,0.3,0,1,0\n"       // non-monotone timestamp
        "t1,0.2,0.3,0,1,0\n";
    const auto r = ingest_text(csv, SchemaMap{});
    CHECK(r.rejected_rows == 2);
    REQUIRE(r.tracks.size() == 1);
    CHECK(r.tracks[0].frames.size() == 3);
}

TEST_CASE("ingest: frame-indexed time base") {
    const std::string csv =
        "id,frame,x,y,vx,vy\n"
        "t1,0,0,0,1,0\n"
        "t1,1,0.04,0,1,0\n"
        "t1,2,0.08,0,1,0\n";
    SchemaMap schema;
    schema.id = "id";
    schema.time = "";
    schema.frame = "frame";
    schema.frame_rate_hz = 25.0;
    const auto r = ingest_text(csv, schema);
    REQUIRE(r.tracks.size() == 1);
    CHECK(r.tracks[0].frames[1].timestamp == doctest::Approx(0.04));
}

TEST_CASE("ingest: 25 Hz resampled to 10 Hz matches linear interpolation") {
    std::string csv = "track_id,time,x,y,vx,vy\n";
    for (int k = 0; k <= 50; ++k) {
        const double t = k * 0.04;
        csv += "t1," + std::to_string(t) + "," + std::to_string(3.0 * t) + "," +
               std::to_string(-1.5 * t) + ",3,-1.5\n";
    }
    const auto r = ingest_text(csv, SchemaMap{}, 10.0);
    REQUIRE(r.tracks.size() == 1);
    const Track& t = r.tracks[0];
    CHECK(t.rate_hz == doctest::Approx(10.0));
    for (const RoadUserState& s : t.frames) {
        CHECK(s.position.x == doctest::Approx(3.0 * s.timestamp).epsilon(1e-9));
        CHECK(s.position.y == doctest::Approx(-1.5 * s.timestamp).epsilon(1e-9));
    }
}

TEST_CASE("ingest: yaw rate from heading differences when absent") {
    std::string csv = "track_id,time,x,y,speed,heading\n";
    for (int k = 0; k <= 20; ++k) {
        const double t = k * 0.1;
        csv += "t1," + std::to_string(t) + ",0,0,5," + std::to_string(0.3 * t) + "\n";
    }
    SchemaMap schema;
    schema.vx = "";
    schema.vy = "";
    schema.speed = "speed";
    schema.heading = "heading";
    const auto r = ingest_text(csv, schema);
    const Track& t = r.tracks[0];
    CHECK(t.yaw_source == YawRateSource::HeadingDifference);
    for (std::size_t i = 1; i + 1 < t.frames.size(); ++i)
        CHECK(t.frames[i].yaw_rate == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("screen_conflicts: constructed crossing pair is kept") {
    ScenarioSpec spec;
    spec.template_id = ScenarioTemplate::Crossing;
    spec.outcome = ScenarioOutcome::Resolved;
    spec.seed = 3;
    const auto g = generate(spec);
    std::vector<Track> tracks = {g.track_a, g.track_b};
    const auto events = screen_conflicts(tracks, fast_params());
    REQUIRE(events.size() == 1);
    CHECK(events[0].event_max.count(MetricId::BBOX_DIST) == 1);
}

TEST_CASE("screen_conflicts: far-apart pair is dropped") {
    ScenarioSpec spec;
    spec.template_id = ScenarioTemplate::ParallelBenign;
    spec.outcome = ScenarioOutcome::Benign;
    spec.lateral_offset = 80.0;
    const auto g = generate(spec);
    std::vector<Track> tracks = {g.track_a, g.track_b};
    CHECK(screen_conflicts(tracks, fast_params()).empty());
}

TEST_CASE("screen_conflicts: close but never closing fails the time criterion") {
    // side-by-side same-speed platoon: distance 30 m, all time metrics infinite
    Track a, b;
    a.track_id = "a";
    b.track_id = "b";
    a.rate_hz = b.rate_hz = 10.0;
    for (int k = 0; k <= 60; ++k) {
        RoadUserState s;
        s.timestamp = k * 0.1;
        s.speed = 10.0;
        s.heading = 0.0;
        s.position = {10.0 * s.timestamp, 0.0};
        a.frames.push_back(s);
        s.position.y = 30.0;
        b.frames.push_back(s);
    }
    CHECK(screen_conflicts(std::vector<Track>{a, b}, fast_params()).empty());
}

TEST_CASE("screen_conflicts: output independent of track order") {
    ScenarioSpec spec;
    spec.template_id = ScenarioTemplate::Merging;
    spec.outcome = ScenarioOutcome::Resolved;
    spec.seed = 5;
    const auto g = generate(spec);
    const auto fwd = screen_conflicts(std::vector<Track>{g.track_a, g.track_b}, fast_params());
    const auto rev = screen_conflicts(std::vector<Track>{g.track_b, g.track_a}, fast_params());
    REQUIRE(fwd.size() == rev.size());
    if (!fwd.empty()) {
        CHECK(fwd[0].times == rev[0].times);
        CHECK(fwd[0].event_max.at(MetricId::BBOX_DIST) ==
              doctest::Approx(rev[0].event_max.at(MetricId::BBOX_DIST)));
    }
}

TEST_CASE("align_episode: anchor, grid fill, and completeness") {
    ScenarioSpec spec;
    spec.template_id = ScenarioTemplate::Crossing;
    spec.outcome = ScenarioOutcome::Resolved;
    spec.lead_in_s = 4.0;
    spec.seed = 11;
    const auto g = generate(spec);
    const auto ev = compute_event(g.track_a, g.track_b, fast_params());
    const Episode ep = align_episode(ev, Outcome::NonCrash, std::nullopt, "case0");

    // anchor is the earliest minimum-distance frame
    const auto& dist = ev.series.at(MetricId::BBOX_DIST);
    double best = 1e300;
    std::size_t best_idx = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        if (dist[k].raw < best) {
            best = dist[k].raw;
            best_idx = k;
        }
    }
    CHECK(ep.anchor_time == doctest::Approx(ev.times[best_idx]));

    // 10 Hz frames align exactly to the grid when 3 s of lead-in exists
    if (ep.anchor_time - ev.times.front() >= 3.0 - 1e-9) {
        CHECK(ep.complete);
        for (std::size_t i = 0; i < kLeadGridSize; ++i) CHECK(ep.samples[i].has_value());
    }
}

TEST_CASE("align_episode: short event is incomplete") {
    Track a, b;
    a.track_id = "a";
    b.track_id = "b";
    a.rate_hz = b.rate_hz = 10.0;
    for (int k = 0; k <= 20; ++k) {  // only 2 s of data
        RoadUserState s;
        s.timestamp = k * 0.1;
        s.speed = 5.0;
        s.heading = 0.0;
        s.position = {5.0 * s.timestamp, 0.0};
        a.frames.push_back(s);
        s.position = {5.0 * s.timestamp + 30.0 - 2.0 * s.timestamp, 0.0};
        s.speed = 3.0;
        b.frames.push_back(s);
    }
    const auto ev = compute_event(a, b, fast_params());
    const Episode ep = align_episode(ev, Outcome::NonCrash, std::nullopt, "short");
    CHECK_FALSE(ep.complete);
}

TEST_CASE("align_episode: crash requires impact time, noncrash forbids it") {
    ScenarioSpec spec;
    spec.template_id = ScenarioTemplate::Crossing;
    spec.outcome = ScenarioOutcome::Resolved;
    const auto g = generate(spec);
    const auto ev = compute_event(g.track_a, g.track_b, fast_params());
    CHECK_THROWS(align_episode(ev, Outcome::Crash, std::nullopt, "x"));
    CHECK_THROWS(align_episode(ev, Outcome::NonCrash, 1.0, "x"));
}

TEST_CASE("align_episode: 25 Hz nearest-frame matching equals exhaustive search") {
    Track a, b;
    a.track_id = "a";
    b.track_id = "b";
    a.rate_hz = b.rate_hz = 25.0;
    for (int k = 0; k <= 150; ++k) {
        RoadUserState s;
        s.timestamp = k * 0.04;
        s.speed = 4.0;
        s.heading = 0.0;
        s.position = {4.0 * s.timestamp, 0.0};
        a.frames.push_back(s);
        RoadUserState o = s;
        o.speed = 0.0;
        o.position = {40.0, 2.5};
        b.frames.push_back(o);
    }
    const auto ev = compute_event(a, b, fast_params());
    const Episode ep = align_episode(ev, Outcome::Crash, 5.0, "c25");
    for (std::size_t i = 0; i < kLeadGridSize; ++i) {
        const double target = 5.0 + lead_time_at(i);
        double best_gap = 1e300;
        for (double t : ev.times) best_gap = std::min(best_gap, std::abs(t - target));
        CHECK(ep.samples[i].has_value() == (best_gap <= kLeadTolerance));
    }
}

TEST_CASE("lead-time grid covers -3.0 to -0.1 in 30 steps") {
    CHECK(lead_time_at(0) == doctest::Approx(-3.0));
    CHECK(lead_time_at(29) == -0.1);
    CHECK(kLeadGridSize == 30);
}
