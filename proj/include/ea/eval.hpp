#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ea/data.hpp"

namespace ea {

struct SeparabilityReport {
    double auprc = 0.0;
    double auroc = 0.0;
    double ks = 0.0;
    std::vector<std::pair<double, double>> tpr_at_fpr;  // (fpr target, recall)
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// Threshold-free separability of positive vs negative risk scores.
/// AUROC by rank statistic (ties count half), AUPRC by step interpolation
/// over the descending-score sweep, KS as the maximum CDF gap, and recall at
/// the largest achievable FPR at or below each target (1%, 5%, 10%).
SeparabilityReport separability(std::span<const double> pos, std::span<const double> neg);

/// Linear-interpolation percentile of the values (p in percent).
double percentile_threshold(std::vector<double> values, double p);

/// Warning lead time under the sustained-warning rule: time from the onset of
/// the final unbroken suprathreshold run ending at t_m back to t_m; 0 when the
/// value at t_m is below theta. Throws when t_m is not a series time.
double warning_lead_time(std::span<const double> times, std::span<const double> risk, double theta,
                         double t_m);

/// Polynomial logistic calibrator fitted by IRLS with a small L2 penalty.
/// Single: features [z, z^2]; joint: [z1, z2, z1^2, z2^2, z1*z2]; z values are
/// standardized with the training fold's mean/sd. Degenerate (constant)
/// features collapse to an intercept-only model.
class Calibrator {
public:
    static Calibrator fit_single(std::span<const double> values, std::span<const int> labels);
    static Calibrator fit_joint(std::span<const std::pair<double, double>> values,
                                std::span<const int> labels);

    double predict(double v) const;                // single
    double predict(double v1, double v2) const;    // joint

    bool intercept_only() const { return intercept_only_; }

private:
    int arity_ = 1;
    double mu1_ = 0.0, sd1_ = 1.0, mu2_ = 0.0, sd2_ = 1.0;
    std::vector<double> beta_;
    bool intercept_only_ = false;

    double eval_features(std::span<const double> feats) const;
};

/// Binary entropy in bits of a Bernoulli(p).
double binary_entropy_bits(double p);

/// Held-out predictive cross-entropy in bits of pooled out-of-fold
/// probabilities against labels; probabilities clipped to [1e-6, 1 - 1e-6].
double cross_entropy_bits(std::span<const double> p, std::span<const int> y);

struct InfoCell {
    double residual_bits = 0.0;
    double retained_bits = 0.0;
    double ratio = 0.0;  // retained / ceiling
    std::optional<std::pair<double, double>> ci_retained;
};

struct IncrementalCell {
    double ea_given_baseline = 0.0;  // added by EA on top of the baseline
    double baseline_given_ea = 0.0;  // added by the baseline on top of EA
};

struct InfoReport {
    std::vector<std::size_t> slice_index;  // used lead-grid indices
    std::vector<double> lead_times;
    std::vector<double> h_bits;  // outcome entropy per slice
    std::map<MetricId, std::vector<InfoCell>> methods;
    std::map<MetricId, std::vector<IncrementalCell>> incremental;  // baselines vs EA
    std::vector<std::string> notes;
    std::uint64_t seed = 0;
    int folds = 5;
};

/// Cross-entropy information-retention analysis over complete episodes:
/// per lead time and method, case-level stratified K-fold out-of-fold
/// calibration, residual uncertainty, retained information, and pairwise
/// incremental information against EA. bootstrap_n > 0 adds case-level
/// bootstrap percentile intervals on retained information.
InfoReport retained_information(const std::vector<Episode>& episodes,
                                const std::vector<MetricId>& methods, int folds,
                                std::uint64_t seed, int bootstrap_n = 0,
                                double bootstrap_level = 0.95);

/// Case-level bootstrap within outcome groups: resample episodes with
/// replacement per group, rerun the analysis, percentile interval per
/// reported quantity.
std::vector<std::pair<double, double>> bootstrap_ci(
    const std::vector<Episode>& episodes,
    const std::function<std::vector<double>(const std::vector<Episode>&)>& analysis,
    int replicates, double level, std::uint64_t seed);

}  // namespace ea
