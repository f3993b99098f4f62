#pragma once

#include <span>
#include <string>
#include <vector>

namespace uq {

// Detection scores for the two populations, both oriented so that a higher
// value means "more ID-like".
struct ScoredPopulations {
    std::vector<double> id_scores;
    std::vector<double> ood_scores;
};

enum class Positive { id, ood };

// Mann-Whitney statistic: mean over (id, ood) pairs of win=1 / tie=0.5 /
// loss=0, computed through sorted binary search. Matches O(n^2) pair
// counting exactly.
double auroc(const ScoredPopulations& p);

// Area under precision-recall through a full threshold sweep with step-wise
// interpolation (precision held at each achieved recall). positive = ood
// flips orientation by negating the scores.
double aupr(const ScoredPopulations& p, Positive positive);

// False positive rate at the smallest achieved true positive rate >= level.
// positive = id classifies by score >= threshold; positive = ood by
// score <= threshold. Thresholds sit on sample points, no interpolation.
double fpr_at_tpr(const ScoredPopulations& p, Positive positive, double level = 0.95);

struct ConfidenceOutcome {
    double confidence = 0.0;
    bool correct = false;
};

// Expected calibration error over equal-width confidence bins.
double calibration_error(std::span<const ConfidenceOutcome> outcomes, int bins = 15);

struct HistogramReport {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> id_counts;
    std::vector<std::size_t> ood_counts;
    double id_quantile05 = 0.0;   // 5% quantile of the ID scores
    double ood_quantile95 = 0.0;  // 95% quantile of the OOD scores
};

// Equal-width bins over the joint score range plus the two quantile
// markers (linear-interpolated empirical quantiles).
HistogramReport histogram_report(const ScoredPopulations& p, int bins);

struct MiRatios {
    double ratio_ft = 0.0;     // mean MI misclassified ID / mean MI correct ID
    double ratio_oodid = 0.0;  // mean MI OOD / mean MI all ID
};

MiRatios mi_ratio_report(std::span<const double> id_correct_mi,
                         std::span<const double> id_incorrect_mi,
                         std::span<const double> ood_mi);

struct MetricReport {
    std::string dataset;
    std::string score_name;
    double auroc = 0.0;
    double aupr_id = 0.0;
    double aupr_ood = 0.0;
    double fpr95_id = 0.0;
    double fpr95_ood = 0.0;
    double id_accuracy = 0.0;
    double ece = 0.0;
    HistogramReport histogram;
};

// Fills the curve metrics of a report from the scored populations; the
// accuracy/ECE fields are the caller's.
MetricReport compute_report(const ScoredPopulations& p, std::string dataset,
                            std::string score_name, int histogram_bins = 40);

void write_report_csv(const std::string& path, std::span<const MetricReport> reports);
std::string render_report_text(std::span<const MetricReport> reports);
void write_histogram_csv(const std::string& path, const HistogramReport& hist);

}  // namespace uq
