#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "uq/error.hpp"
#include "uq/metrics.hpp"
#include "uq/rng.hpp"

using namespace uq;

namespace {

// O(n^2) pair counting, the definitional AUROC.
double auroc_bruteforce(const ScoredPopulations& p) {
    double credit = 0.0;
    for (double a : p.id_scores) {
        for (double b : p.ood_scores) {
            if (a > b) {
                credit += 1.0;
            } else if (a == b) {
                credit += 0.5;
            }
        }
    }
    return credit /
           (static_cast<double>(p.id_scores.size()) * static_cast<double>(p.ood_scores.size()));
}

// Recounts TP/FP from scratch at every distinct threshold.
double aupr_bruteforce(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::set<double, std::greater<>> thresholds(pos.begin(), pos.end());
    thresholds.insert(neg.begin(), neg.end());
    double area = 0.0, prev_recall = 0.0;
    for (double thr : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (double s : pos) {
            if (s >= thr) ++tp;
        }
        for (double s : neg) {
            if (s >= thr) ++fp;
        }
        if (tp == 0) continue;
        const double recall = static_cast<double>(tp) / static_cast<double>(pos.size());
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

// Walks the achieved-TPR points directly.
double fpr_bruteforce(const ScoredPopulations& p, Positive positive, double level) {
    if (positive == Positive::id) {
        std::vector<double> id = p.id_scores;
        std::sort(id.begin(), id.end(), std::greater<>());
        for (std::size_t k = 1; k <= id.size(); ++k) {
            if (static_cast<double>(k) / static_cast<double>(id.size()) < level) continue;
            const double thr = id[k - 1];
            std::size_t fp = 0;
            for (double s : p.ood_scores) {
                if (s >= thr) ++fp;
            }
            return static_cast<double>(fp) / static_cast<double>(p.ood_scores.size());
        }
    } else {
        std::vector<double> ood = p.ood_scores;
        std::sort(ood.begin(), ood.end());
        for (std::size_t k = 1; k <= ood.size(); ++k) {
            if (static_cast<double>(k) / static_cast<double>(ood.size()) < level) continue;
            const double thr = ood[k - 1];
            std::size_t fp = 0;
            for (double s : p.id_scores) {
                if (s <= thr) ++fp;
            }
            return static_cast<double>(fp) / static_cast<double>(p.id_scores.size());
        }
    }
    return 1.0;
}

ScoredPopulations fuzzed_populations(RngStream& rng) {
    ScoredPopulations p;
    const std::size_t n_id = 1 + rng.next_below(150);
    const std::size_t n_ood = 1 + rng.next_below(150);
    // Coarse grid scores force plenty of ties.
    const bool coarse = rng.next_below(2) == 0;
    const auto draw = [&](double shift) {
        const double v = rng.next_normal() + shift;
        return coarse ? std::round(v * 4.0) / 4.0 : v;
    };
    for (std::size_t i = 0; i < n_id; ++i) p.id_scores.push_back(draw(0.8));
    for (std::size_t i = 0; i < n_ood; ++i) p.ood_scores.push_back(draw(0.0));
    return p;
}

}  // namespace

TEST_CASE("auroc on separable, identical and tied populations") {
    CHECK(auroc({{2.0, 3.0}, {0.0, 1.0}}) == 1.0);
    CHECK(auroc({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}}) == 0.5);
    CHECK(auroc({{1.0}, {1.0}}) == 0.5);
    CHECK_THROWS_AS(auroc({{}, {1.0}}), EmptyPopulation);
}

TEST_CASE("auroc equals brute-force pair counting exactly") {
    RngStream rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const ScoredPopulations p = fuzzed_populations(rng);
        CHECK(auroc(p) == auroc_bruteforce(p));
    }
}

TEST_CASE("auroc is a rank statistic and antisymmetric under role swap") {
    RngStream rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const ScoredPopulations p = fuzzed_populations(rng);
        const double base = auroc(p);

        ScoredPopulations swapped{p.ood_scores, p.id_scores};
        CHECK(base + auroc(swapped) == doctest::Approx(1.0).epsilon(1e-12));

        ScoredPopulations exp_scores = p;
        for (double& v : exp_scores.id_scores) v = std::exp(v * 0.5);
        for (double& v : exp_scores.ood_scores) v = std::exp(v * 0.5);
        CHECK(auroc(exp_scores) == doctest::Approx(base).epsilon(1e-12));

        ScoredPopulations affine = p;
        for (double& v : affine.id_scores) v = 3.0 * v + 11.0;
        for (double& v : affine.ood_scores) v = 3.0 * v + 11.0;
        CHECK(auroc(affine) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("aupr on separable and constant scores") {
    CHECK(aupr({{2.0, 3.0}, {0.0, 1.0}}, Positive::id) == doctest::Approx(1.0));
    // Constant classifier: precision is the prevalence of the positive class.
    const ScoredPopulations constant{{1.0, 1.0, 1.0}, {1.0}};
    CHECK(aupr(constant, Positive::id) == doctest::Approx(0.75));
    CHECK(aupr(constant, Positive::ood) == doctest::Approx(0.25));
}

TEST_CASE("aupr matches the threshold-enumeration oracle") {
    RngStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const ScoredPopulations p = fuzzed_populations(rng);
        CHECK(std::abs(aupr(p, Positive::id) - aupr_bruteforce(p.id_scores, p.ood_scores)) <
              1e-12);
        std::vector<double> neg_id, neg_ood;
        for (double v : p.id_scores) neg_id.push_back(-v);
        for (double v : p.ood_scores) neg_ood.push_back(-v);
        CHECK(std::abs(aupr(p, Positive::ood) - aupr_bruteforce(neg_ood, neg_id)) < 1e-12);
    }
}

TEST_CASE("fpr_at_tpr conventions") {
    const ScoredPopulations separable{{2.0, 3.0, 4.0}, {-1.0, 0.0, 1.0}};
    CHECK(fpr_at_tpr(separable, Positive::id) == 0.0);
    CHECK(fpr_at_tpr(separable, Positive::ood) == 0.0);

    ScoredPopulations same;
    for (int i = 1; i <= 100; ++i) {
        same.id_scores.push_back(i);
        same.ood_scores.push_back(i);
    }
    CHECK(fpr_at_tpr(same, Positive::id) == doctest::Approx(0.95).epsilon(0.02));
    CHECK(fpr_at_tpr(same, Positive::ood) == doctest::Approx(0.95).epsilon(0.02));

    ScoredPopulations spec_case;
    for (int i = 1; i <= 100; ++i) spec_case.id_scores.push_back(i);
    spec_case.ood_scores = {0.5, 5.5, 50.5, 200.0};
    CHECK(fpr_at_tpr(spec_case, Positive::id) ==
          fpr_bruteforce(spec_case, Positive::id, 0.95));
    CHECK(fpr_at_tpr(spec_case, Positive::id) == doctest::Approx(0.5));
}

TEST_CASE("fpr_at_tpr matches enumeration and is monotone in level") {
    RngStream rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const ScoredPopulations p = fuzzed_populations(rng);
        for (double level : {0.5, 0.8, 0.95, 1.0}) {
            CHECK(fpr_at_tpr(p, Positive::id, level) == fpr_bruteforce(p, Positive::id, level));
            CHECK(fpr_at_tpr(p, Positive::ood, level) == fpr_bruteforce(p, Positive::ood, level));
        }
        double prev_id = 0.0, prev_ood = 0.0;
        for (double level : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0}) {
            const double f_id = fpr_at_tpr(p, Positive::id, level);
            const double f_ood = fpr_at_tpr(p, Positive::ood, level);
            CHECK(f_id >= prev_id);
            CHECK(f_ood >= prev_ood);
            prev_id = f_id;
            prev_ood = f_ood;
        }
    }
}

TEST_CASE("calibration_error on calibrated and overconfident sets") {
    // Confidence equal to the empirical accuracy inside each bin.
    std::vector<ConfidenceOutcome> calibrated;
    for (int tenth = 1; tenth <= 9; ++tenth) {
        const double conf = tenth / 10.0 + 0.003;  // interior of a bin
        for (int i = 0; i < 1000; ++i) {
            calibrated.push_back({conf, i < tenth * 100});
        }
    }
    CHECK(calibration_error(calibrated, 10) < 0.005);

    std::vector<ConfidenceOutcome> overconfident;
    for (int i = 0; i < 100; ++i) overconfident.push_back({1.0, i % 2 == 0});
    CHECK(calibration_error(overconfident, 15) == doctest::Approx(0.5));
}

TEST_CASE("calibration_error matches a direct per-bin oracle") {
    RngStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ConfidenceOutcome> outcomes;
        const std::size_t n = 1 + rng.next_below(300);
        for (std::size_t i = 0; i < n; ++i) {
            outcomes.push_back({rng.next_double(), rng.next_below(2) == 0});
        }
        const int bins = 15;
        double expected = 0.0;
        for (int b = 0; b < bins; ++b) {
            double conf = 0.0, acc = 0.0;
            std::size_t count = 0;
            for (const auto& o : outcomes) {
                int bin = static_cast<int>(o.confidence * bins);
                if (bin == bins) bin = bins - 1;
                if (bin != b) continue;
                conf += o.confidence;
                acc += o.correct ? 1.0 : 0.0;
                ++count;
            }
            if (count == 0) continue;
            expected += (static_cast<double>(count) / static_cast<double>(n)) *
                        std::abs(acc / count - conf / count);
        }
        CHECK(calibration_error(outcomes, bins) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("histogram_report bins and quantiles") {
    const ScoredPopulations single{{2.0, 2.0, 2.0}, {2.0}};
    const HistogramReport h1 = histogram_report(single, 8);
    CHECK(h1.id_counts[0] == 3);
    CHECK(h1.id_quantile05 == 2.0);
    CHECK(h1.ood_quantile95 == 2.0);

    ScoredPopulations grid;
    for (int i = 0; i <= 100; ++i) grid.id_scores.push_back(i / 100.0);
    grid.ood_scores = {0.5};
    const HistogramReport h2 = histogram_report(grid, 10);
    CHECK(h2.id_quantile05 == doctest::Approx(0.05).epsilon(1e-9));
    std::size_t total = 0;
    for (std::size_t c : h2.id_counts) total += c;
    CHECK(total == grid.id_scores.size());
}

TEST_CASE("mi_ratio_report") {
    const std::vector<double> same = {0.2, 0.2};
    const MiRatios flat = mi_ratio_report(same, same, same);
    CHECK(flat.ratio_ft == doctest::Approx(1.0));
    CHECK(flat.ratio_oodid == doctest::Approx(1.0));

    const std::vector<double> correct = {0.1, 0.3};
    const std::vector<double> wrong = {0.2, 0.6};
    const std::vector<double> ood = {0.4};
    const MiRatios r = mi_ratio_report(correct, wrong, ood);
    CHECK(r.ratio_ft == doctest::Approx(2.0));
    CHECK(r.ratio_oodid == doctest::Approx(0.4 / 0.3));

    CHECK_THROWS_AS(mi_ratio_report({}, wrong, ood), EmptyGroup);
    CHECK_THROWS_AS(mi_ratio_report(correct, {}, ood), EmptyGroup);
    CHECK_THROWS_AS(mi_ratio_report(correct, wrong, {}), EmptyGroup);
}
