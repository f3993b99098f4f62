#pragma once

#include <span>
#include <vector>

namespace uq {

struct LossValue {
    double loss = 0.0;
    std::vector<double> dlogits;
};

// -log softmax(logits)[label]; gradient softmax - onehot.
LossValue cross_entropy_loss(std::span<const double> logits, int label);

// Cross-entropy on logits / (tau * ||logits||) with the gradient taken
// through the normalization. Scale-invariant in the logits by construction.
// Throws ZeroLogitVector when ||logits|| < 1e-12.
LossValue logit_norm_loss(std::span<const double> logits, int label, double tau);

}  // namespace uq
