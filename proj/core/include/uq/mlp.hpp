#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uq/matrix.hpp"
#include "uq/rng.hpp"

namespace uq {

struct Layer {
    Matrix weights;  // out x in, row-major
    std::vector<double> bias;
};

// Fully connected ReLU network; dropout (inverted convention) sits after
// every hidden activation. The final layer is linear and K wide.
struct MlpModel {
    std::vector<Layer> layers;
    double dropout_rate = 0.0;
    int class_count = 0;

    std::size_t input_dim() const { return layers.front().weights.cols(); }
    std::size_t penultimate_dim() const { return layers.back().weights.cols(); }
    std::size_t layer_count() const { return layers.size(); }
};

// dims = {d, hidden..., K}; He-style uniform fan-in init, zero biases.
MlpModel make_mlp(const std::vector<std::size_t>& dims, double dropout_rate, int class_count,
                  RngStream& rng);

struct ForwardTrace {
    // activations[0] is the input; activations[i] for hidden layers is the
    // post-ReLU, post-dropout output feeding layer i; the last entry holds
    // the logits.
    std::vector<std::vector<double>> activations;
    // One entry per hidden layer with the applied dropout scale per unit
    // (0 for dropped, 1/(1-p) for kept). Empty in deterministic mode.
    std::vector<std::vector<double>> dropout_masks;
    // f(x): the last hidden activation before dropout (equals the final
    // layer's input in deterministic mode). Class Gaussians are estimated
    // over these, keeping dropout noise out of the covariances.
    std::vector<double> penultimate_features;

    std::span<const double> logits() const { return activations.back(); }
    std::span<const double> penultimate() const { return penultimate_features; }
};

// rng == nullptr runs deterministically (masks off, no rescaling thanks to
// the inverted-dropout convention); otherwise Bernoulli(1-p) masks are
// sampled and kept units scaled by 1/(1-p).
ForwardTrace forward(const MlpModel& model, std::span<const double> x, RngStream* rng);

// Max-subtracted softmax; output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;
};

Gradients zero_gradients(const MlpModel& model);

// Backpropagates dloss/dlogits through the trace, reusing its dropout
// masks, and accumulates into grads.
void backward(const MlpModel& model, const ForwardTrace& trace,
              std::span<const double> dlogits, Gradients& grads);

struct SgdState {
    std::vector<Matrix> velocity_w;
    std::vector<std::vector<double>> velocity_b;
};

SgdState make_sgd_state(const MlpModel& model);

// v <- momentum*v + g + wd*w;  w <- w - lr*v
void sgd_step(MlpModel& model, const Gradients& grads, double lr, double momentum,
              double weight_decay, SgdState& state);

enum class ScheduleKind { cosine, step };
enum class LossKind { cross_entropy, logit_norm };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double initial_lr = 0.1;
    ScheduleKind schedule = ScheduleKind::cosine;
    std::vector<int> milestones = {80, 140};  // step schedule, x0.1 at each
    double momentum = 0.9;
    double weight_decay = 5e-4;
    LossKind loss = LossKind::cross_entropy;
    double tau = 0.04;  // logit-norm temperature
    double beta = 0.1;  // uncertainty-loss weight
    std::uint64_t seed = 0;
};

double lr_at(const TrainConfig& config, int epoch);

}  // namespace uq
