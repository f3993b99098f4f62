#include "uq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "uq/csv.hpp"
#include "uq/error.hpp"

namespace uq {

namespace {

void require_nonempty(const ScoredPopulations& p, const char* op) {
    if (p.id_scores.empty() || p.ood_scores.empty()) {
        throw EmptyPopulation(std::string(op) + ": both populations must be nonempty");
    }
}

// k-th order statistic helpers on sorted copies.
std::vector<double> sorted(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return s;
}

// Smallest k in [1, n] with k/n >= level, using the same comparison an
// enumeration over k would use.
std::size_t min_count_at_level(std::size_t n, double level) {
    auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);
    while (k > 1 &&
           static_cast<double>(k - 1) / static_cast<double>(n) >= level) {
        --k;
    }
    while (k < n && static_cast<double>(k) / static_cast<double>(n) < level) {
        ++k;
    }
    return k;
}

double interpolated_quantile(std::span<const double> values, double q) {
    const std::vector<double> s = sorted(values);
    if (s.size() == 1) return s[0];
    const double h = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = h - std::floor(h);
    return s[lo] + frac * (s[hi] - s[lo]);
}

double aupr_oriented(std::vector<double> pos, std::vector<double> neg) {
    // Threshold sweep over all distinct scores, descending; prediction rule
    // is score >= threshold.
    std::sort(pos.begin(), pos.end(), std::greater<>());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    std::vector<double> thresholds;
    thresholds.reserve(pos.size() + neg.size());
    thresholds.insert(thresholds.end(), pos.begin(), pos.end());
    thresholds.insert(thresholds.end(), neg.begin(), neg.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n_pos = static_cast<double>(pos.size());
    double area = 0.0;
    double prev_recall = 0.0;
    std::size_t ip = 0, in = 0;
    for (double thr : thresholds) {
        while (ip < pos.size() && pos[ip] >= thr) ++ip;
        while (in < neg.size() && neg[in] >= thr) ++in;
        if (ip == 0) continue;
        const double recall = static_cast<double>(ip) / n_pos;
        const double precision = static_cast<double>(ip) / static_cast<double>(ip + in);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

}  // namespace

double auroc(const ScoredPopulations& p) {
    require_nonempty(p, "auroc");
    const std::vector<double> ood = sorted(p.ood_scores);
    double credit = 0.0;
    for (double s : p.id_scores) {
        const auto lo = std::lower_bound(ood.begin(), ood.end(), s) - ood.begin();
        const auto hi = std::upper_bound(ood.begin(), ood.end(), s) - ood.begin();
        credit += static_cast<double>(lo) + 0.5 * static_cast<double>(hi - lo);
    }
    return credit /
           (static_cast<double>(p.id_scores.size()) * static_cast<double>(p.ood_scores.size()));
}

double aupr(const ScoredPopulations& p, Positive positive) {
    require_nonempty(p, "aupr");
    if (positive == Positive::id) {
        return aupr_oriented(p.id_scores, p.ood_scores);
    }
    std::vector<double> pos(p.ood_scores.size());
    std::vector<double> neg(p.id_scores.size());
    std::transform(p.ood_scores.begin(), p.ood_scores.end(), pos.begin(),
                   [](double v) { return -v; });
    std::transform(p.id_scores.begin(), p.id_scores.end(), neg.begin(),
                   [](double v) { return -v; });
    return aupr_oriented(std::move(pos), std::move(neg));
}

double fpr_at_tpr(const ScoredPopulations& p, Positive positive, double level) {
    require_nonempty(p, "fpr_at_tpr");
    if (!(level > 0.0 && level <= 1.0)) {
        throw ConfigError("fpr_at_tpr: level must lie in (0, 1]");
    }
    if (positive == Positive::id) {
        const std::vector<double> id = sorted(p.id_scores);
        const std::size_t k = min_count_at_level(id.size(), level);
        const double threshold = id[id.size() - k];  // k-th largest
        std::size_t fp = 0;
        for (double s : p.ood_scores) {
            if (s >= threshold) ++fp;
        }
        return static_cast<double>(fp) / static_cast<double>(p.ood_scores.size());
    }
    const std::vector<double> ood = sorted(p.ood_scores);
    const std::size_t k = min_count_at_level(ood.size(), level);
    const double threshold = ood[k - 1];  // k-th smallest
    std::size_t fp = 0;
    for (double s : p.id_scores) {
        if (s <= threshold) ++fp;
    }
    return static_cast<double>(fp) / static_cast<double>(p.id_scores.size());
}

double calibration_error(std::span<const ConfidenceOutcome> outcomes, int bins) {
    if (bins < 1) {
        throw ConfigError("calibration_error: bins must be >= 1");
    }
    if (outcomes.empty()) return 0.0;
    std::vector<double> conf_sum(bins, 0.0);
    std::vector<double> correct_sum(bins, 0.0);
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& o : outcomes) {
        auto b = static_cast<std::size_t>(o.confidence * bins);
        b = std::min(b, static_cast<std::size_t>(bins - 1));
        conf_sum[b] += o.confidence;
        correct_sum[b] += o.correct ? 1.0 : 0.0;
        ++counts[b];
    }
    double ece = 0.0;
    const double n = static_cast<double>(outcomes.size());
    for (int b = 0; b < bins; ++b) {
        if (counts[b] == 0) continue;
        const double cnt = static_cast<double>(counts[b]);
        ece += (cnt / n) * std::abs(correct_sum[b] / cnt - conf_sum[b] / cnt);
    }
    return ece;
}

HistogramReport histogram_report(const ScoredPopulations& p, int bins) {
    require_nonempty(p, "histogram_report");
    if (bins < 1) {
        throw ConfigError("histogram_report: bins must be >= 1");
    }
    HistogramReport h;
    h.lo = std::min(*std::min_element(p.id_scores.begin(), p.id_scores.end()),
                    *std::min_element(p.ood_scores.begin(), p.ood_scores.end()));
    h.hi = std::max(*std::max_element(p.id_scores.begin(), p.id_scores.end()),
                    *std::max_element(p.ood_scores.begin(), p.ood_scores.end()));
    h.id_counts.assign(bins, 0);
    h.ood_counts.assign(bins, 0);
    const double width = h.hi - h.lo;
    const auto bin_of = [&](double v) -> std::size_t {
        if (width <= 0.0) return 0;
        auto b = static_cast<std::size_t>((v - h.lo) / width * bins);
        return std::min(b, static_cast<std::size_t>(bins - 1));
    };
    for (double v : p.id_scores) ++h.id_counts[bin_of(v)];
    for (double v : p.ood_scores) ++h.ood_counts[bin_of(v)];
    h.id_quantile05 = interpolated_quantile(p.id_scores, 0.05);
    h.ood_quantile95 = interpolated_quantile(p.ood_scores, 0.95);
    return h;
}

MiRatios mi_ratio_report(std::span<const double> id_correct_mi,
                         std::span<const double> id_incorrect_mi,
                         std::span<const double> ood_mi) {
    if (id_correct_mi.empty()) throw EmptyGroup("mi_ratio_report: no correctly classified ID");
    if (id_incorrect_mi.empty()) throw EmptyGroup("mi_ratio_report: no misclassified ID");
    if (ood_mi.empty()) throw EmptyGroup("mi_ratio_report: no OOD samples");
    const auto mean = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double correct = mean(id_correct_mi);
    const double incorrect = mean(id_incorrect_mi);
    double all_id = 0.0;
    for (double x : id_correct_mi) all_id += x;
    for (double x : id_incorrect_mi) all_id += x;
    all_id /= static_cast<double>(id_correct_mi.size() + id_incorrect_mi.size());

    MiRatios r;
    r.ratio_ft = incorrect / correct;
    r.ratio_oodid = mean(ood_mi) / all_id;
    return r;
}

MetricReport compute_report(const ScoredPopulations& p, std::string dataset,
                            std::string score_name, int histogram_bins) {
    MetricReport r;
    r.dataset = std::move(dataset);
    r.score_name = std::move(score_name);
    r.auroc = auroc(p);
    r.aupr_id = aupr(p, Positive::id);
    r.aupr_ood = aupr(p, Positive::ood);
    r.fpr95_id = fpr_at_tpr(p, Positive::id);
    r.fpr95_ood = fpr_at_tpr(p, Positive::ood);
    r.histogram = histogram_report(p, histogram_bins);
    return r;
}

void write_report_csv(const std::string& path, std::span<const MetricReport> reports) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "dataset,score,fpr95_id,aupr_id,auroc,fpr95_ood,aupr_ood,id_acc,ece,"
           "id_q05,ood_q95\n";
    for (const auto& r : reports) {
        out << r.dataset << "," << r.score_name << "," << format_double(r.fpr95_id) << ","
            << format_double(r.aupr_id) << "," << format_double(r.auroc) << ","
            << format_double(r.fpr95_ood) << "," << format_double(r.aupr_ood) << ","
            << format_double(r.id_accuracy) << "," << format_double(r.ece) << ","
            << format_double(r.histogram.id_quantile05) << ","
            << format_double(r.histogram.ood_quantile95) << "\n";
    }
}

std::string render_report_text(std::span<const MetricReport> reports) {
    std::ostringstream out;
    for (const auto& r : reports) {
        out << "dataset " << r.dataset << ", score " << r.score_name << "\n"
            << "  FPR95_ID   " << format_double(r.fpr95_id) << "\n"
            << "  FPR95_OOD  " << format_double(r.fpr95_ood) << "\n"
            << "  AUROC      " << format_double(r.auroc) << "\n"
            << "  AUPR_ID    " << format_double(r.aupr_id) << "\n"
            << "  AUPR_OOD   " << format_double(r.aupr_ood) << "\n"
            << "  ID acc     " << format_double(r.id_accuracy) << "\n"
            << "  ECE        " << format_double(r.ece) << "\n"
            << "  ID 5% / OOD 95% quantile  " << format_double(r.histogram.id_quantile05) << " / "
            << format_double(r.histogram.ood_quantile95) << "\n";
    }
    return out.str();
}

void write_histogram_csv(const std::string& path, const HistogramReport& hist) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "bin_lo,bin_hi,id_count,ood_count\n";
    const auto bins = hist.id_counts.size();
    const double width = bins > 0 ? (hist.hi - hist.lo) / static_cast<double>(bins) : 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        out << format_double(hist.lo + width * static_cast<double>(b)) << ","
            << format_double(hist.lo + width * static_cast<double>(b + 1)) << ","
            << hist.id_counts[b] << "," << hist.ood_counts[b] << "\n";
    }
}

}  // namespace uq
