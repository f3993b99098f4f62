#include "uq/loss.hpp"

#include <cmath>
#include <string>

#include "uq/error.hpp"
#include "uq/matrix.hpp"
#include "uq/mlp.hpp"

namespace uq {

LossValue cross_entropy_loss(std::span<const double> logits, int label) {
    const auto k = static_cast<std::size_t>(label);
    if (label < 0 || k >= logits.size()) {
        throw LabelOutOfRange("cross_entropy_loss: label " + std::to_string(label) + " for " +
                              std::to_string(logits.size()) + " classes");
    }
    LossValue out;
    out.dlogits = softmax(logits);
    out.loss = logsumexp(logits) - logits[k];
    out.dlogits[k] -= 1.0;
    return out;
}

LossValue logit_norm_loss(std::span<const double> logits, int label, double tau) {
    const auto k = static_cast<std::size_t>(label);
    if (label < 0 || k >= logits.size()) {
        throw LabelOutOfRange("logit_norm_loss: label " + std::to_string(label) + " for " +
                              std::to_string(logits.size()) + " classes");
    }
    if (!(tau > 0.0)) {
        throw ConfigError("logit_norm_loss: tau must be positive");
    }
    double norm_sq = 0.0;
    for (double v : logits) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
        throw ZeroLogitVector("logit_norm_loss: logit norm below 1e-12");
    }

    const double scale = 1.0 / (tau * norm);
    std::vector<double> z(logits.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = logits[i] * scale;

    LossValue inner = cross_entropy_loss(z, label);

    // dL/dg_j = (1/(tau*n)) * (dL/dz_j - (g . dL/dz) g_j / n^2)
    double proj = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) proj += logits[i] * inner.dlogits[i];
    LossValue out;
    out.loss = inner.loss;
    out.dlogits.resize(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        out.dlogits[j] = scale * (inner.dlogits[j] - proj * logits[j] / norm_sq);
    }
    return out;
}

}  // namespace uq
