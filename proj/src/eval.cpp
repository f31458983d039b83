#include "ea/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ea {

namespace {

constexpr double kProbClip = 1e-6;
constexpr double kL2 = 1e-6;
constexpr int kMaxIrls = 100;
constexpr double kIrlsTol = 1e-8;

double sigmoid(double eta) {
    if (eta >= 0.0) {
        const double e = std::exp(-std::min(eta, 35.0));
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(std::max(eta, -35.0));
    return e / (1.0 + e);
}

// Cholesky solve of a small SPD system; returns false when not SPD.
bool cholesky_solve(std::vector<double>& m, std::vector<double>& rhs, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = m[i * n + j];
            for (int k = 0; k < j; ++k) sum -= m[i * n + k] * m[j * n + k];
            if (i == j) {
                if (sum <= 0.0) return false;
                m[i * n + i] = std::sqrt(sum);
            } else {
                m[i * n + j] = sum / m[j * n + j];
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        double sum = rhs[i];
        for (int k = 0; k < i; ++k) sum -= m[i * n + k] * rhs[k];
        rhs[i] = sum / m[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = rhs[i];
        for (int k = i + 1; k < n; ++k) sum -= m[k * n + i] * rhs[k];
        rhs[i] = sum / m[i * n + i];
    }
    return true;
}

// IRLS for penalized logistic regression; X rows carry the intercept term.
// Newton steps are halved while they worsen the penalized log-loss, which
// keeps quasi-separated small folds from diverging.
std::vector<double> fit_irls(const std::vector<std::vector<double>>& x,
                             std::span<const int> y) {
    const int n = static_cast<int>(x.size());
    const int p = static_cast<int>(x.front().size());

    auto penalized_loss = [&](const std::vector<double>& beta) {
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
            double eta = 0.0;
            for (int j = 0; j < p; ++j) eta += beta[j] * x[i][j];
            // log(1 + exp(.)) in a stable form
            const double z = y[i] ? -eta : eta;
            loss += (z > 30.0) ? z : std::log1p(std::exp(z));
        }
        for (int j = 1; j < p; ++j) loss += 0.5 * kL2 * beta[j] * beta[j];
        return loss;
    };

    std::vector<double> beta(p, 0.0);
    double loss = penalized_loss(beta);
    for (int it = 0; it < kMaxIrls; ++it) {
        std::vector<double> h(p * p, 0.0), g(p, 0.0);
        for (int i = 0; i < n; ++i) {
            double eta = 0.0;
            for (int j = 0; j < p; ++j) eta += beta[j] * x[i][j];
            const double mu = sigmoid(eta);
            const double w = std::max(mu * (1.0 - mu), 1e-10);
            const double r = y[i] - mu;
            for (int j = 0; j < p; ++j) {
                g[j] += x[i][j] * r;
                for (int k = 0; k <= j; ++k) h[j * p + k] += w * x[i][j] * x[i][k];
            }
        }
        for (int j = 0; j < p; ++j)
            for (int k = j + 1; k < p; ++k) h[j * p + k] = h[k * p + j];
        // L2 on non-intercept coefficients
        for (int j = 1; j < p; ++j) {
            h[j * p + j] += kL2;
            g[j] -= kL2 * beta[j];
        }
        std::vector<double> step = g;
        if (!cholesky_solve(h, step, p)) break;

        double scale = 1.0;
        std::vector<double> candidate(p);
        double cand_loss = loss;
        for (int half = 0; half < 30; ++half) {
            for (int j = 0; j < p; ++j) candidate[j] = beta[j] + scale * step[j];
            cand_loss = penalized_loss(candidate);
            if (cand_loss <= loss + 1e-12) break;
            scale *= 0.5;
        }
        if (cand_loss > loss + 1e-12) break;  // no improving step remains
        double max_step = 0.0;
        for (int j = 0; j < p; ++j) {
            max_step = std::max(max_step, std::abs(candidate[j] - beta[j]));
            beta[j] = candidate[j];
        }
        loss = cand_loss;
        if (max_step < kIrlsTol) break;
    }
    return beta;
}

struct Standardizer {
    double mu = 0.0;
    double sd = 1.0;
    bool degenerate = false;
};

Standardizer standardize(std::span<const double> v) {
    Standardizer s;
    if (v.empty()) {
        s.degenerate = true;
        return s;
    }
    s.mu = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - s.mu) * (x - s.mu);
    s.sd = std::sqrt(var / v.size());
    if (!(s.sd > 1e-12)) {
        s.sd = 1.0;
        s.degenerate = true;
    }
    return s;
}

double prevalence_logit(std::span<const int> y) {
    double mean = 0.0;
    for (int v : y) mean += v;
    mean /= y.empty() ? 1.0 : static_cast<double>(y.size());
    const double p = std::clamp(mean, kProbClip, 1.0 - kProbClip);
    return std::log(p / (1.0 - p));
}

}  // namespace

SeparabilityReport separability(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("separability: need at least one sample per class");
    SeparabilityReport rep;
    rep.n_pos = pos.size();
    rep.n_neg = neg.size();

    struct Scored {
        double s;
        int y;
    };
    std::vector<Scored> all;
    all.reserve(pos.size() + neg.size());
    for (double v : pos) all.push_back({v, 1});
    for (double v : neg) all.push_back({v, 0});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.s < b.s; });

    // AUROC via average ranks (exactly the tie-half pairwise count)
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].s == all[i].s) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (all[k].y == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    rep.auroc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);

    // descending sweep over distinct scores: AUPRC (step interpolation),
    // KS, and recall at the largest FPR <= each target
    std::vector<double> targets = {0.01, 0.05, 0.10};
    std::vector<double> best_tpr(targets.size(), 0.0);
    double tp = 0.0, fp = 0.0;
    double auprc = 0.0, prev_recall = 0.0, ks = 0.0;
    for (std::size_t i = all.size(); i > 0;) {
        std::size_t j = i;
        while (j > 0 && all[j - 1].s == all[i - 1].s) --j;
        for (std::size_t k = j; k < i; ++k) {
            if (all[k].y == 1)
                tp += 1.0;
            else
                fp += 1.0;
        }
        const double recall = tp / np;
        const double precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 1.0;
        auprc += (recall - prev_recall) * precision;
        prev_recall = recall;
        const double fpr = fp / nn;
        ks = std::max(ks, std::abs(recall - fpr));
        for (std::size_t t = 0; t < targets.size(); ++t)
            if (fpr <= targets[t] + 1e-12) best_tpr[t] = std::max(best_tpr[t], recall);
        i = j;
    }
    rep.auprc = auprc;
    rep.ks = ks;
    for (std::size_t t = 0; t < targets.size(); ++t)
        rep.tpr_at_fpr.emplace_back(targets[t], best_tpr[t]);
    return rep;
}

double percentile_threshold(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile_threshold: empty input");
    if (!(p > 0.0) || !(p < 100.0))
        throw std::invalid_argument("percentile_threshold: p must be in (0, 100)");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double w = rank - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

double warning_lead_time(std::span<const double> times, std::span<const double> risk, double theta,
                         double t_m) {
    if (times.size() != risk.size() || times.empty())
        throw std::invalid_argument("warning_lead_time: times and risk must align");
    std::size_t end = times.size();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t_m) <= 1e-6) end = i;
    if (end == times.size())
        throw std::invalid_argument("warning_lead_time: t_m is not a series time");
    if (!(risk[end] >= theta)) return 0.0;
    std::size_t onset = end;
    while (onset > 0 && risk[onset - 1] >= theta) --onset;
    return t_m - times[onset];
}

Calibrator Calibrator::fit_single(std::span<const double> values, std::span<const int> labels) {
    if (values.size() != labels.size() || values.empty())
        throw std::invalid_argument("fit_single: values and labels must align");
    bool has0 = false, has1 = false;
    for (int y : labels) (y ? has1 : has0) = true;
    Calibrator c;
    c.arity_ = 1;
    const Standardizer st = standardize(values);
    c.mu1_ = st.mu;
    c.sd1_ = st.sd;
    if (st.degenerate || !has0 || !has1) {
        c.intercept_only_ = true;
        c.beta_ = {prevalence_logit(labels)};
        return c;
    }
    std::vector<std::vector<double>> x;
    x.reserve(values.size());
    for (double v : values) {
        const double z = (v - st.mu) / st.sd;
        x.push_back({1.0, z, z * z});
    }
    c.beta_ = fit_irls(x, labels);
    return c;
}

Calibrator Calibrator::fit_joint(std::span<const std::pair<double, double>> values,
                                 std::span<const int> labels) {
    if (values.size() != labels.size() || values.empty())
        throw std::invalid_argument("fit_joint: values and labels must align");
    bool has0 = false, has1 = false;
    for (int y : labels) (y ? has1 : has0) = true;
    Calibrator c;
    c.arity_ = 2;
    std::vector<double> v1, v2;
    v1.reserve(values.size());
    v2.reserve(values.size());
    for (const auto& [a, b] : values) {
        v1.push_back(a);
        v2.push_back(b);
    }
    const Standardizer s1 = standardize(v1);
    const Standardizer s2 = standardize(v2);
    c.mu1_ = s1.mu;
    c.sd1_ = s1.sd;
    c.mu2_ = s2.mu;
    c.sd2_ = s2.sd;
    if ((s1.degenerate && s2.degenerate) || !has0 || !has1) {
        c.intercept_only_ = true;
        c.beta_ = {prevalence_logit(labels)};
        return c;
    }
    std::vector<std::vector<double>> x;
    x.reserve(values.size());
    for (const auto& [a, b] : values) {
        const double z1 = (a - s1.mu) / s1.sd;
        const double z2 = (b - s2.mu) / s2.sd;
        x.push_back({1.0, z1, z2, z1 * z1, z2 * z2, z1 * z2});
    }
    c.beta_ = fit_irls(x, labels);
    return c;
}

double Calibrator::eval_features(std::span<const double> feats) const {
    double eta = beta_[0];
    for (std::size_t i = 0; i < feats.size() && i + 1 < beta_.size(); ++i)
        eta += beta_[i + 1] * feats[i];
    return sigmoid(eta);
}

double Calibrator::predict(double v) const {
    if (intercept_only_) return sigmoid(beta_[0]);
    const double z = (v - mu1_) / sd1_;
    const std::array<double, 2> f = {z, z * z};
    return eval_features(f);
}

double Calibrator::predict(double v1, double v2) const {
    if (intercept_only_) return sigmoid(beta_[0]);
    const double z1 = (v1 - mu1_) / sd1_;
    const double z2 = (v2 - mu2_) / sd2_;
    const std::array<double, 5> f = {z1, z2, z1 * z1, z2 * z2, z1 * z2};
    return eval_features(f);
}

double binary_entropy_bits(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double cross_entropy_bits(std::span<const double> p, std::span<const int> y) {
    if (p.size() != y.size() || p.empty())
        throw std::invalid_argument("cross_entropy_bits: need aligned nonempty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], kProbClip, 1.0 - kProbClip);
        sum += y[i] ? std::log2(q) : std::log2(1.0 - q);
    }
    return -sum / static_cast<double>(p.size());
}

namespace {

// case-level stratified fold assignment, seeded
std::vector<int> assign_folds(const std::vector<Episode>& episodes, int folds,
                              std::uint64_t seed) {
    std::vector<std::size_t> crash_idx, non_idx;
    for (std::size_t i = 0; i < episodes.size(); ++i)
        (episodes[i].outcome == Outcome::Crash ? crash_idx : non_idx).push_back(i);
    std::mt19937_64 rng(seed);
    std::shuffle(crash_idx.begin(), crash_idx.end(), rng);
    std::shuffle(non_idx.begin(), non_idx.end(), rng);
    std::vector<int> fold(episodes.size(), 0);
    for (std::size_t k = 0; k < crash_idx.size(); ++k)
        fold[crash_idx[k]] = static_cast<int>(k % folds);
    for (std::size_t k = 0; k < non_idx.size(); ++k)
        fold[non_idx[k]] = static_cast<int>(k % folds);
    return fold;
}

struct Slice {
    std::vector<double> value_by_metric[kMetricCount];
    std::vector<int> labels;
    std::vector<int> fold;
};

// pooled out-of-fold predictions, single metric
double oof_residual_single(const std::vector<double>& v, const std::vector<int>& y,
                           const std::vector<int>& fold, int folds) {
    std::vector<double> pred(v.size(), 0.5);
    for (int f = 0; f < folds; ++f) {
        std::vector<double> tv;
        std::vector<int> ty;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (fold[i] != f) {
                tv.push_back(v[i]);
                ty.push_back(y[i]);
            }
        }
        if (tv.empty()) continue;
        const Calibrator c = Calibrator::fit_single(tv, ty);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (fold[i] == f) pred[i] = c.predict(v[i]);
    }
    return cross_entropy_bits(pred, y);
}

double oof_residual_joint(const std::vector<double>& v1, const std::vector<double>& v2,
                          const std::vector<int>& y, const std::vector<int>& fold, int folds) {
    std::vector<double> pred(v1.size(), 0.5);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::pair<double, double>> tv;
        std::vector<int> ty;
        for (std::size_t i = 0; i < v1.size(); ++i) {
            if (fold[i] != f) {
                tv.emplace_back(v1[i], v2[i]);
                ty.push_back(y[i]);
            }
        }
        if (tv.empty()) continue;
        const Calibrator c = Calibrator::fit_joint(tv, ty);
        for (std::size_t i = 0; i < v1.size(); ++i)
            if (fold[i] == f) pred[i] = c.predict(v1[i], v2[i]);
    }
    return cross_entropy_bits(pred, y);
}

InfoReport analyze(const std::vector<Episode>& episodes, const std::vector<MetricId>& methods,
                   int folds, std::uint64_t seed, bool incremental) {
    InfoReport rep;
    rep.seed = seed;
    rep.folds = folds;
    const std::vector<int> fold = assign_folds(episodes, folds, seed);

    for (std::size_t g = 0; g < kLeadGridSize; ++g) {
        Slice slice;
        for (std::size_t e = 0; e < episodes.size(); ++e) {
            const auto& s = episodes[e].samples[g];
            if (!s) continue;
            bool finite = true;
            for (MetricId id : methods)
                if (!std::isfinite((*s)[metric_index(id)])) finite = false;
            if (!finite) continue;
            for (MetricId id : methods)
                slice.value_by_metric[metric_index(id)].push_back((*s)[metric_index(id)]);
            slice.labels.push_back(episodes[e].outcome == Outcome::Crash ? 1 : 0);
            slice.fold.push_back(fold[e]);
        }
        const auto n1 = static_cast<std::size_t>(
            std::count(slice.labels.begin(), slice.labels.end(), 1));
        if (slice.labels.empty() || n1 == 0 || n1 == slice.labels.size()) {
            rep.notes.push_back("lead time " + std::to_string(lead_time_at(g)) +
                                " omitted: single-class slice");
            continue;
        }
        rep.slice_index.push_back(g);
        rep.lead_times.push_back(lead_time_at(g));
        const double h = binary_entropy_bits(static_cast<double>(n1) / slice.labels.size());
        rep.h_bits.push_back(h);

        std::map<MetricId, double> residual;
        for (MetricId id : methods) {
            const double r = oof_residual_single(slice.value_by_metric[metric_index(id)],
                                                 slice.labels, slice.fold, folds);
            residual[id] = r;
            rep.methods[id].push_back({r, h - r, h > 0.0 ? (h - r) / h : 0.0, std::nullopt});
        }
        if (incremental) {
            const auto& ea_vals = slice.value_by_metric[metric_index(MetricId::EA)];
            for (MetricId id : methods) {
                if (id == MetricId::EA) continue;
                const double joint =
                    oof_residual_joint(ea_vals, slice.value_by_metric[metric_index(id)],
                                       slice.labels, slice.fold, folds);
                rep.incremental[id].push_back(
                    {residual[id] - joint, residual[MetricId::EA] - joint});
            }
        }
    }
    return rep;
}

}  // namespace

InfoReport retained_information(const std::vector<Episode>& episodes,
                                const std::vector<MetricId>& methods, int folds,
                                std::uint64_t seed, int bootstrap_n, double bootstrap_level) {
    if (folds < 2) throw std::invalid_argument("retained_information: folds must be >= 2");
    std::vector<Episode> complete;
    complete.reserve(episodes.size());
    for (const Episode& e : episodes)
        if (e.complete) complete.push_back(e);
    if (complete.empty()) throw std::invalid_argument("retained_information: no complete episodes");

    const bool has_ea =
        std::find(methods.begin(), methods.end(), MetricId::EA) != methods.end();
    InfoReport rep = analyze(complete, methods, folds, seed, has_ea);

    if (bootstrap_n > 0) {
        auto point = [&](const std::vector<Episode>& eps) {
            const InfoReport r = analyze(eps, methods, folds, seed, false);
            std::vector<double> out;
            // fixed layout: method-major, slice-minor over the FULL grid so
            // replicates align even when a replicate drops a slice
            out.reserve(methods.size() * kLeadGridSize);
            for (MetricId id : methods) {
                std::vector<double> per_grid(kLeadGridSize,
                                             std::numeric_limits<double>::quiet_NaN());
                const auto it = r.methods.find(id);
                if (it != r.methods.end())
                    for (std::size_t s = 0; s < r.slice_index.size(); ++s)
                        per_grid[r.slice_index[s]] = it->second[s].retained_bits;
                out.insert(out.end(), per_grid.begin(), per_grid.end());
            }
            return out;
        };
        const auto cis = bootstrap_ci(complete, point, bootstrap_n, bootstrap_level, seed ^ 0x9e3779b97f4a7c15ULL);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            auto& cells = rep.methods[methods[m]];
            for (std::size_t s = 0; s < rep.slice_index.size(); ++s) {
                const auto& ci = cis[m * kLeadGridSize + rep.slice_index[s]];
                if (std::isfinite(ci.first) && std::isfinite(ci.second))
                    cells[s].ci_retained = ci;
            }
        }
    }
    return rep;
}

std::vector<std::pair<double, double>> bootstrap_ci(
    const std::vector<Episode>& episodes,
    const std::function<std::vector<double>(const std::vector<Episode>&)>& analysis,
    int replicates, double level, std::uint64_t seed) {
    if (replicates < 100) throw std::invalid_argument("bootstrap_ci: need >= 100 replicates");
    std::vector<std::size_t> crash_idx, non_idx;
    for (std::size_t i = 0; i < episodes.size(); ++i)
        (episodes[i].outcome == Outcome::Crash ? crash_idx : non_idx).push_back(i);

    std::vector<std::vector<double>> stats;
    stats.reserve(replicates);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < replicates; ++r) {
        std::vector<Episode> sample;
        sample.reserve(episodes.size());
        if (!crash_idx.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, crash_idx.size() - 1);
            for (std::size_t k = 0; k < crash_idx.size(); ++k)
                sample.push_back(episodes[crash_idx[pick(rng)]]);
        }
        if (!non_idx.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, non_idx.size() - 1);
            for (std::size_t k = 0; k < non_idx.size(); ++k)
                sample.push_back(episodes[non_idx[pick(rng)]]);
        }
        stats.push_back(analysis(sample));
    }

    const std::size_t width = stats.front().size();
    std::vector<std::pair<double, double>> out(width,
                                               {std::numeric_limits<double>::quiet_NaN(),
                                                std::numeric_limits<double>::quiet_NaN()});
    const double alpha = (1.0 - level) / 2.0;
    for (std::size_t q = 0; q < width; ++q) {
        std::vector<double> vals;
        vals.reserve(stats.size());
        for (const auto& s : stats)
            if (q < s.size() && std::isfinite(s[q])) vals.push_back(s[q]);
        if (vals.size() < 10) continue;
        out[q] = {percentile_threshold(vals, 100.0 * alpha),
                  percentile_threshold(vals, 100.0 * (1.0 - alpha))};
    }
    return out;
}

}  // namespace ea
