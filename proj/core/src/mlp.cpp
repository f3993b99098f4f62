#include "uq/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uq/error.hpp"

namespace uq {

MlpModel make_mlp(const std::vector<std::size_t>& dims, double dropout_rate, int class_count,
                  RngStream& rng) {
    if (dims.size() < 2) {
        throw ConfigError("make_mlp: need at least input and output dims");
    }
    if (dims.back() != static_cast<std::size_t>(class_count)) {
        throw DimensionMismatch("make_mlp: final width " + std::to_string(dims.back()) +
                                " vs class count " + std::to_string(class_count));
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("make_mlp: dropout rate must lie in [0, 1)");
    }
    MlpModel model;
    model.dropout_rate = dropout_rate;
    model.class_count = class_count;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.weights = Matrix(dims[l + 1], dims[l]);
        layer.bias.assign(dims[l + 1], 0.0);
        const double bound = std::sqrt(6.0 / static_cast<double>(dims[l]));
        for (double& w : layer.weights.data()) {
            w = bound * (2.0 * rng.next_double() - 1.0);
        }
        model.layers.push_back(std::move(layer));
    }
    return model;
}

ForwardTrace forward(const MlpModel& model, std::span<const double> x, RngStream* rng) {
    if (x.size() != model.input_dim()) {
        throw DimensionMismatch("forward: input dim " + std::to_string(x.size()) + " vs model " +
                                std::to_string(model.input_dim()));
    }
    ForwardTrace trace;
    trace.activations.emplace_back(x.begin(), x.end());

    const double p = model.dropout_rate;
    const bool stochastic = rng != nullptr && p > 0.0;
    const double keep_scale = p > 0.0 ? 1.0 / (1.0 - p) : 1.0;

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const Layer& layer = model.layers[l];
        std::vector<double> z = matvec(layer.weights, trace.activations.back());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];

        if (l + 1 == model.layers.size()) {
            trace.activations.push_back(std::move(z));
            break;
        }
        for (double& v : z) v = std::max(0.0, v);
        if (l + 2 == model.layers.size()) trace.penultimate_features = z;
        if (stochastic) {
            std::vector<double> mask(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
                mask[i] = rng->next_double() >= p ? keep_scale : 0.0;
                z[i] *= mask[i];
            }
            trace.dropout_masks.push_back(std::move(mask));
        }
        trace.activations.push_back(std::move(z));
    }
    if (model.layers.size() == 1) {
        trace.penultimate_features = trace.activations.front();
    }
    return trace;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw DimensionMismatch("softmax: empty logits");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    for (const Layer& layer : model.layers) {
        g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void backward(const MlpModel& model, const ForwardTrace& trace,
              std::span<const double> dlogits, Gradients& grads) {
    const std::size_t n_layers = model.layers.size();
    if (trace.activations.size() != n_layers + 1) {
        throw TraceMismatch("backward: trace has " + std::to_string(trace.activations.size()) +
                            " activations for a " + std::to_string(n_layers) + "-layer model");
    }
    if (dlogits.size() != static_cast<std::size_t>(model.class_count)) {
        throw DimensionMismatch("backward: dlogits size " + std::to_string(dlogits.size()) +
                                " vs class count " + std::to_string(model.class_count));
    }
    const bool has_masks = !trace.dropout_masks.empty();
    if (has_masks && trace.dropout_masks.size() != n_layers - 1) {
        throw TraceMismatch("backward: trace carries " +
                            std::to_string(trace.dropout_masks.size()) + " masks for " +
                            std::to_string(n_layers - 1) + " hidden layers");
    }

    std::vector<double> delta(dlogits.begin(), dlogits.end());
    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = model.layers[l];
        const auto& input = trace.activations[l];
        if (input.size() != layer.weights.cols() || delta.size() != layer.weights.rows()) {
            throw TraceMismatch("backward: activation shape mismatch at layer " +
                                std::to_string(l));
        }
        Matrix& gw = grads.weights[l];
        auto& gb = grads.bias[l];
        for (std::size_t i = 0; i < layer.weights.rows(); ++i) {
            gb[i] += delta[i];
            auto grow = gw.row(i);
            const double di = delta[i];
            for (std::size_t j = 0; j < layer.weights.cols(); ++j) grow[j] += di * input[j];
        }
        if (l == 0) break;

        std::vector<double> next = matvec_transposed(layer.weights, delta);
        // Through dropout (mask scale) and ReLU of the producing layer. A
        // kept unit has activation > 0 iff its pre-activation was > 0; a
        // dropped unit contributes zero either way.
        const auto& act = trace.activations[l];
        for (std::size_t j = 0; j < next.size(); ++j) {
            if (act[j] > 0.0) {
                if (has_masks) next[j] *= trace.dropout_masks[l - 1][j];
            } else {
                next[j] = 0.0;
            }
        }
        delta = std::move(next);
    }
}

SgdState make_sgd_state(const MlpModel& model) {
    SgdState s;
    for (const Layer& layer : model.layers) {
        s.velocity_w.emplace_back(layer.weights.rows(), layer.weights.cols());
        s.velocity_b.emplace_back(layer.bias.size(), 0.0);
    }
    return s;
}

void sgd_step(MlpModel& model, const Gradients& grads, double lr, double momentum,
              double weight_decay, SgdState& state) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& w = model.layers[l].weights.data();
        auto& v = state.velocity_w[l].data();
        const auto& g = grads.weights[l].data();
        if (w.size() != g.size()) {
            throw DimensionMismatch("sgd_step: gradient shape mismatch at layer " +
                                    std::to_string(l));
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = momentum * v[i] + g[i] + weight_decay * w[i];
            w[i] -= lr * v[i];
        }
        auto& b = model.layers[l].bias;
        auto& vb = state.velocity_b[l];
        const auto& gb = grads.bias[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            vb[i] = momentum * vb[i] + gb[i] + weight_decay * b[i];
            b[i] -= lr * vb[i];
        }
    }
}

double lr_at(const TrainConfig& config, int epoch) {
    if (epoch < 0 || epoch >= config.epochs) {
        throw EpochOutOfRange("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                              std::to_string(config.epochs) + ")");
    }
    if (config.schedule == ScheduleKind::cosine) {
        return 0.5 * config.initial_lr *
               (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                               static_cast<double>(config.epochs)));
    }
    double lr = config.initial_lr;
    for (int m : config.milestones) {
        if (epoch >= m) lr *= 0.1;
    }
    return lr;
}

}  // namespace uq
