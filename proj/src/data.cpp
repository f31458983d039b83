#include "ea/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ea {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

struct RawRow {
    double t;
    double x, y;
    double vx = 0.0, vy = 0.0;
    double speed = 0.0, heading = 0.0;
    bool has_velocity = false, has_speed_heading = false;
    std::optional<double> yaw_rate;
    std::optional<double> length, width;
    std::string cls;
};

struct ColumnIndex {
    int id = -1, time = -1, frame = -1, x = -1, y = -1, vx = -1, vy = -1;
    int speed = -1, heading = -1, yaw_rate = -1, length = -1, width = -1, cls = -1;
};

int find_col(const std::vector<std::string>& header, const std::string& name) {
    if (name.empty()) return -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name) return static_cast<int>(i);
    return -1;
}

Track finalize_track(const std::string& id, std::vector<RawRow> rows, const SchemaMap& schema,
                     double resample_hz, std::size_t& rejected) {
    // rows arrive ordered by appearance; enforce strictly increasing time
    std::vector<RawRow> clean;
    clean.reserve(rows.size());
    for (const RawRow& r : rows) {
        if (!clean.empty() && r.t <= clean.back().t + 1e-9) {
            ++rejected;
            continue;
        }
        clean.push_back(r);
    }
    if (clean.size() < 2) throw std::runtime_error("track " + id + ": fewer than 2 usable frames");

    Track track;
    track.track_id = id;
    track.class_label =
        clean.front().cls.empty() ? RoadUserClass::Car : road_user_class_from_string(clean.front().cls);

    std::vector<RoadUserState> states;
    states.reserve(clean.size());
    double last_heading = 0.0;
    bool have_heading = false;
    for (const RawRow& r : clean) {
        RoadUserState s;
        s.timestamp = r.t;
        s.position = {r.x, r.y};
        if (r.has_speed_heading) {
            s.speed = r.speed;
            s.heading = r.heading;
        } else {
            s.speed = std::hypot(r.vx, r.vy);
            if (s.speed > 0.1) {
                s.heading = std::atan2(r.vy, r.vx);
            } else {
                s.heading = have_heading ? last_heading : std::atan2(r.vy, r.vx);
            }
        }
        last_heading = s.heading;
        have_heading = true;
        s.length = r.length.value_or(schema.default_length);
        s.width = r.width.value_or(schema.default_width);
        s.class_label = track.class_label;
        if (r.yaw_rate) s.yaw_rate = *r.yaw_rate;
        states.push_back(s);
    }

    const bool yaw_from_column = clean.front().yaw_rate.has_value();
    track.yaw_source = yaw_from_column ? YawRateSource::Column : YawRateSource::HeadingDifference;
    if (!yaw_from_column) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            const std::size_t lo = (i == 0) ? 0 : i - 1;
            const std::size_t hi = (i + 1 == states.size()) ? i : i + 1;
            const double dt = states[hi].timestamp - states[lo].timestamp;
            states[i].yaw_rate =
                dt > 0.0 ? wrap_angle(states[hi].heading - states[lo].heading) / dt : 0.0;
        }
    }

    if (resample_hz > 0.0) {
        const double dt = 1.0 / resample_hz;
        std::vector<RoadUserState> resampled;
        const double t0 = states.front().timestamp;
        const double t1 = states.back().timestamp;
        std::size_t j = 0;
        for (double t = t0; t <= t1 + 1e-9; t += dt) {
            while (j + 2 < states.size() && states[j + 1].timestamp <= t) ++j;
            const RoadUserState& a = states[j];
            const RoadUserState& b = states[j + 1];
            const double span = b.timestamp - a.timestamp;
            const double w = span > 0.0 ? std::clamp((t - a.timestamp) / span, 0.0, 1.0) : 0.0;
            RoadUserState s = a;
            s.timestamp = t;
            s.position = a.position + w * (b.position - a.position);
            s.speed = a.speed + w * (b.speed - a.speed);
            s.heading = a.heading + w * wrap_angle(b.heading - a.heading);
            s.yaw_rate = a.yaw_rate + w * (b.yaw_rate - a.yaw_rate);
            resampled.push_back(s);
        }
        if (resampled.size() < 2)
            throw std::runtime_error("track " + id + ": too short after resampling");
        states = std::move(resampled);
        track.rate_hz = resample_hz;
    } else {
        const double step = states[1].timestamp - states[0].timestamp;
        for (std::size_t i = 1; i < states.size(); ++i) {
            const double d = states[i].timestamp - states[i - 1].timestamp;
            if (std::abs(d - step) > 1e-6)
                throw std::runtime_error("track " + id +
                                         ": non-uniform timestamps; set resample_hz");
        }
        track.rate_hz = 1.0 / step;
    }
    track.frames = std::move(states);
    return track;
}

}  // namespace

IngestResult ingest_text(const std::string& text, const SchemaMap& schema, double resample_hz) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest: empty input");
    const auto header = split(trim(line), schema.delimiter);

    ColumnIndex col;
    col.id = find_col(header, schema.id);
    col.time = find_col(header, schema.time);
    col.frame = find_col(header, schema.frame);
    col.x = find_col(header, schema.x);
    col.y = find_col(header, schema.y);
    col.vx = find_col(header, schema.vx);
    col.vy = find_col(header, schema.vy);
    col.speed = find_col(header, schema.speed);
    col.heading = find_col(header, schema.heading);
    col.yaw_rate = find_col(header, schema.yaw_rate);
    col.length = find_col(header, schema.length);
    col.width = find_col(header, schema.width);
    col.cls = find_col(header, schema.class_label);

    if (col.id < 0) throw std::runtime_error("ingest: missing id column '" + schema.id + "'");
    if (col.time < 0 && col.frame < 0)
        throw std::runtime_error("ingest: missing time/frame column");
    if (col.frame >= 0 && col.time < 0 && !(schema.frame_rate_hz > 0.0))
        throw std::runtime_error("ingest: frame column needs frame_rate_hz");
    if (col.x < 0 || col.y < 0) throw std::runtime_error("ingest: missing x/y columns");
    const bool has_vel = col.vx >= 0 && col.vy >= 0;
    const bool has_sh = col.speed >= 0 && col.heading >= 0;
    if (!has_vel && !has_sh)
        throw std::runtime_error("ingest: need (vx, vy) or (speed, heading) columns");

    std::map<std::string, std::vector<RawRow>> by_id;
    std::vector<std::string> order;
    std::size_t rejected = 0;
    auto field_num = [](const std::vector<std::string>& f, int idx) -> std::optional<double> {
        if (idx < 0 || static_cast<std::size_t>(idx) >= f.size()) return std::nullopt;
        const std::string v = trim(f[idx]);
        if (v.empty()) return std::nullopt;
        try {
            return std::stod(v);
        } catch (...) {
            return std::nullopt;
        }
    };

    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto f = split(line, schema.delimiter);
        RawRow r;
        const auto x = field_num(f, col.x);
        const auto y = field_num(f, col.y);
        std::optional<double> t;
        if (col.time >= 0)
            t = field_num(f, col.time);
        else if (const auto fr = field_num(f, col.frame))
            t = *fr / schema.frame_rate_hz;
        if (!x || !y || !t || !std::isfinite(*x) || !std::isfinite(*y) || !std::isfinite(*t)) {
            ++rejected;
            continue;
        }
        r.t = *t;
        r.x = *x;
        r.y = *y;
        if (has_vel) {
            const auto vx = field_num(f, col.vx);
            const auto vy = field_num(f, col.vy);
            if (!vx || !vy) {
                ++rejected;
                continue;
            }
            r.vx = *vx;
            r.vy = *vy;
            r.has_velocity = true;
        }
        if (has_sh) {
            const auto sp = field_num(f, col.speed);
            const auto hd = field_num(f, col.heading);
            if (sp && hd) {
                r.speed = *sp;
                r.heading = *hd;
                r.has_speed_heading = true;
            } else if (!r.has_velocity) {
                ++rejected;
                continue;
            }
        }
        r.yaw_rate = field_num(f, col.yaw_rate);
        r.length = field_num(f, col.length);
        r.width = field_num(f, col.width);
        if (col.cls >= 0 && static_cast<std::size_t>(col.cls) < f.size()) r.cls = trim(f[col.cls]);
        const std::string id = trim(f[col.id]);
        if (by_id.find(id) == by_id.end()) order.push_back(id);
        by_id[id].push_back(r);
    }

    IngestResult out;
    out.rejected_rows = rejected;
    for (const std::string& id : order)
        out.tracks.push_back(finalize_track(id, std::move(by_id[id]), schema, resample_hz,
                                            out.rejected_rows));
    return out;
}

IngestResult ingest(const std::string& path, const SchemaMap& schema, double resample_hz) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return ingest_text(buf.str(), schema, resample_hz);
}

namespace {

struct Overlap {
    std::size_t a_begin, b_begin, count;
};

std::optional<Overlap> co_presence(const Track& a, const Track& b) {
    if (std::abs(a.rate_hz - b.rate_hz) > 1e-6)
        throw std::runtime_error("screen_conflicts: tracks must share a rate (resample first)");
    const double dt = 1.0 / a.rate_hz;
    const double t0 = std::max(a.frames.front().timestamp, b.frames.front().timestamp);
    const double t1 = std::min(a.frames.back().timestamp, b.frames.back().timestamp);
    if (t1 < t0 - 1e-9) return std::nullopt;
    const auto ia = static_cast<std::size_t>(std::llround((t0 - a.frames.front().timestamp) / dt));
    const auto ib = static_cast<std::size_t>(std::llround((t0 - b.frames.front().timestamp) / dt));
    if (std::abs((a.frames[ia].timestamp - b.frames[ib].timestamp)) > 1e-6) return std::nullopt;
    const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt)) + 1;
    return Overlap{ia, ib, n};
}

}  // namespace

ConflictEvent compute_event(const Track& a, const Track& b, const ScreeningParams& params) {
    const auto ov = co_presence(a, b);
    if (!ov) throw std::runtime_error("compute_event: tracks do not overlap in time");
    ConflictEvent ev;
    ev.id_a = a.track_id;
    ev.id_b = b.track_id;
    ev.rate_hz = a.rate_hz;
    ev.times.reserve(ov->count);
    for (MetricId id : params.metrics) ev.series[id].reserve(ov->count);
    for (std::size_t k = 0; k < ov->count; ++k) {
        const RoadUserState& sa = a.frames[ov->a_begin + k];
        const RoadUserState& sb = b.frames[ov->b_begin + k];
        ev.times.push_back(sa.timestamp);
        const FrameMetrics fm = compute_frame_metrics(sa, sb, params.ea);
        for (MetricId id : params.metrics) ev.series[id].push_back(fm.samples[metric_index(id)]);
    }
    for (MetricId id : params.metrics) {
        double best = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (const RiskSample& s : ev.series[id]) {
            if (!s.defined) continue;
            best = std::max(best, s.risk);
            any = true;
        }
        if (any) ev.event_max[id] = best;
    }
    return ev;
}

std::vector<ConflictEvent> screen_conflicts(std::span<const Track> tracks,
                                            const ScreeningParams& params) {
    std::vector<ConflictEvent> events;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = i + 1; j < tracks.size(); ++j) {
            const Track& a = tracks[i];
            const Track& b = tracks[j];
            const auto ov = co_presence(a, b);
            if (!ov) continue;

            bool time_criterion = false;
            bool distance_criterion = false;
            for (std::size_t k = 0; k < ov->count; ++k) {
                const RoadUserState& sa = a.frames[ov->a_begin + k];
                const RoadUserState& sb = b.frames[ov->b_begin + k];
                if (!distance_criterion &&
                    obb_distance(sa.footprint(), sb.footprint()) <= params.distance_threshold_m)
                    distance_criterion = true;
                if (!time_criterion) {
                    const double thr = params.time_threshold_s;
                    if (ttc_drac(sa, sb).ttc <= thr || act(sa, sb) <= thr ||
                        ttc2d(sa, sb, params.ea.horizon) <= thr)
                        time_criterion = true;
                }
                if (time_criterion && distance_criterion) break;
            }
            if (time_criterion && distance_criterion) events.push_back(compute_event(a, b, params));
        }
    }
    return events;
}

double lead_time_at(std::size_t i) { return (static_cast<double>(i) - 30.0) / 10.0; }

Episode align_episode(const ConflictEvent& event, Outcome outcome,
                      std::optional<double> impact_time, const std::string& case_id) {
    if (outcome == Outcome::Crash && !impact_time)
        throw std::invalid_argument("align_episode: crash episodes require an impact time");
    if (outcome == Outcome::NonCrash && impact_time)
        throw std::invalid_argument("align_episode: noncrash episodes carry no impact time");

    Episode ep;
    ep.outcome = outcome;
    ep.case_id = case_id;

    if (outcome == Outcome::Crash) {
        ep.anchor_time = *impact_time;
    } else {
        const auto it = event.series.find(MetricId::BBOX_DIST);
        if (it == event.series.end())
            throw std::runtime_error("align_episode: BBOX_DIST series required for anchoring");
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t k = 0; k < it->second.size(); ++k) {
            if (it->second[k].raw < best) {  // strict: earliest frame wins ties
                best = it->second[k].raw;
                best_idx = k;
            }
        }
        ep.anchor_time = event.times[best_idx];
    }

    bool all = true;
    for (std::size_t i = 0; i < kLeadGridSize; ++i) {
        const double target = ep.anchor_time + lead_time_at(i);
        // nearest frame within the tolerance
        std::size_t best_idx = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        const auto lower = std::lower_bound(event.times.begin(), event.times.end(), target);
        for (auto it = lower; it != event.times.end() && it - lower < 2; ++it) {
            const double g = std::abs(*it - target);
            if (g < best_gap) {
                best_gap = g;
                best_idx = static_cast<std::size_t>(it - event.times.begin());
            }
        }
        if (lower != event.times.begin()) {
            const auto prev = lower - 1;
            const double g = std::abs(*prev - target);
            if (g < best_gap) {
                best_gap = g;
                best_idx = static_cast<std::size_t>(prev - event.times.begin());
            }
        }
        if (best_gap > kLeadTolerance) {
            all = false;
            continue;
        }
        std::array<double, kMetricCount> row{};
        for (const auto& [id, series] : event.series)
            row[metric_index(id)] = series[best_idx].defined
                                        ? series[best_idx].risk
                                        : std::numeric_limits<double>::quiet_NaN();
        ep.samples[i] = row;
    }
    ep.complete = all;
    return ep;
}

}  // namespace ea
