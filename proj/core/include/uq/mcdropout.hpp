#pragma once

#include <span>
#include <vector>

#include "uq/matrix.hpp"
#include "uq/mlp.hpp"
#include "uq/rng.hpp"

namespace uq {

// T stochastic passes for one input; K is always the class count and T
// always the pass count.
struct McSamples {
    Matrix probs;                  // T x K, each row softmaxed
    std::vector<double> energies;  // per pass, -logsumexp(logits)

    std::size_t passes() const { return probs.rows(); }
    std::size_t classes() const { return probs.cols(); }
};

struct McSummary {
    std::vector<double> mean_probs;
    int predicted = 0;
    double entropy = 0.0;  // H of the mean prediction
    double mutual_information = 0.0;
    double expected_kl = 0.0;
    double predictive_variance = 0.0;          // averaged over classes
    std::vector<double> class_variances;       // per-class E[(p - mean)^2]
    double energy_mean = 0.0;
    double energy_variance = 0.0;
    // Energy-based detection score, higher = more ID-like. summarize()
    // initializes it to -energy_mean; evaluations of VOS checkpoints
    // replace it with the class-scaled deviation from the running energy
    // mean (vos_epistemic_score), the statistic the joint loss trained.
    double epistemic = 0.0;
    double combined = 0.0;  // filled per evaluation batch by combined_scores
};

// T stochastic forward passes; pass t draws its masks from
// stream.derive(kind=pass, t), so any execution order gives identical
// results. T = 1 with dropout disabled reduces to a deterministic pass.
McSamples mc_infer(const MlpModel& model, std::span<const double> x, std::size_t passes,
                   const RngStream& stream);

// Builds an McSamples directly from a T x K logit matrix (external dumps).
McSamples mc_from_logits(const Matrix& logits);

// Mean prediction, entropy, mutual information, expected KL divergence,
// predictive variance and energy statistics. Probabilities are floored at
// 1e-12 before any logarithm.
McSummary summarize(const McSamples& samples);

// The summary's energy-based detection score (higher = more ID-like).
double epistemic_score(const McSummary& summary);

// Per-batch combination of the energy and MI components: each component is
// min-max scaled over the batch with ID-high orientation (energy via
// epistemic_score, MI negated) and mixed with the given weights. A
// component that is constant over the batch contributes 0.
std::vector<double> combined_scores(std::span<const McSummary> batch, double w_mi,
                                    double w_energy);

}  // namespace uq
