#include "ea/ea_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ea {

const char* model_combo_name(std::size_t index) {
    static constexpr std::array<const char*, 4> names = {"cv_cv", "cv_ctrv", "ctrv_cv",
                                                         "ctrv_ctrv"};
    return names.at(index);
}

EaResult ea(const RoadUserState& a, const RoadUserState& b, const EaConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    EaResult out;
    if (obb_overlap(a.footprint(), b.footprint())) {
        out.already_colliding = true;
        out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    const CvEaResult cv = ea_cv_value(a, b, config.horizon, config.stations);
    out.per_model[0] = cv.ea;
    out.cv_vector = cv.vector;

    for (std::size_t i = 1; i < kModelCombos.size(); ++i) {
        const auto [ma, mb] = kModelCombos[i];
        const NumericEaResult r = ea_numeric(a, b, ma, mb, config.horizon, config.numeric);
        out.per_model[i] = r.ea;
        if (!r.ea) out.any_undefined = true;
    }

    double sum = 0.0;
    int n = 0;
    for (const auto& v : out.per_model) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n > 0) out.mean = sum / n;
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double ea_bruteforce(const RoadUserState& a, const RoadUserState& b, MotionModel model_a,
                     MotionModel model_b, double horizon, const BruteGrid& grid) {
    if (!(grid.dm > 0.0) || !(grid.dt > 0.0) || grid.n_dirs < 1)
        throw std::invalid_argument("ea_bruteforce: grid resolutions must be positive");
    if (obb_overlap(a.footprint(), b.footprint()))
        return std::numeric_limits<double>::quiet_NaN();

    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / grid.dt));
    struct Frame {
        Pose pa;
        Pose pb;
        double half_s2;
    };
    std::vector<Frame> frames;
    frames.reserve(n_steps);
    bool baseline_hit = false;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double s = static_cast<double>(k) * grid.dt;
        Frame f{extrapolate(a, model_a, s), extrapolate(b, model_b, s), 0.5 * s * s};
        const Obb oa{f.pa.position, f.pa.heading, a.length, a.width};
        const Obb ob{f.pb.position, f.pb.heading, b.length, b.width};
        baseline_hit |= obb_overlap(oa, ob);
        frames.push_back(f);
    }
    if (!baseline_hit) return 0.0;

    // hint: frame index of the previous hit; overlap windows move slowly with
    // m, so rechecking it first makes colliding magnitudes O(1).
    auto collides = [&](Vec2 accel, std::size_t& hint) {
        const std::size_t n = frames.size();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = (hint + k) % n;
            const Frame& f = frames[idx];
            const Obb oa{f.pa.position + f.half_s2 * accel, f.pa.heading, a.length, a.width};
            const Obb ob{f.pb.position, f.pb.heading, b.length, b.width};
            if (obb_overlap(oa, ob)) {
                hint = idx;
                return true;
            }
        }
        return false;
    };

    const Vec2 v_rel = a.velocity() - b.velocity();
    const double phi0 = (v_rel.norm() > 1e-12) ? std::atan2(v_rel.y, v_rel.x) : 0.0;
    double best = grid.a_max;
    // Start opposite the relative velocity: braking usually sets a tight bound
    // early, so the m-scan of the remaining directions prunes fast.
    for (int d = 0; d < grid.n_dirs; ++d) {
        const Vec2 u = heading_dir(phi0 + kPi + 2.0 * kPi * d / grid.n_dirs);
        std::size_t hint = 0;
        for (double m = grid.dm; m < best; m += grid.dm) {
            if (!collides(m * u, hint)) {
                best = m;
                break;
            }
        }
    }
    return best;
}

BenchmarkReport benchmark(const std::vector<std::pair<RoadUserState, RoadUserState>>& frames,
                          const EaConfig& config) {
    if (frames.size() < 100) throw std::invalid_argument("benchmark: need >= 100 frames");
    std::vector<double> ms;
    ms.reserve(frames.size());
    for (const auto& [a, b] : frames) {
        const auto t0 = std::chrono::steady_clock::now();
        volatile double sink = ea(a, b, config).mean.value_or(0.0);
        (void)sink;
        ms.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count());
    }
    double sum = 0.0;
    for (double v : ms) sum += v;
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * sorted.size())) - 1;
    return {sum / ms.size(), sorted[std::min(idx, sorted.size() - 1)]};
}

}  // namespace ea
