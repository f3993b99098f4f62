#include "uq/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uq/error.hpp"
#include "uq/loss.hpp"

namespace uq {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kOutlierStream = 0x766f7330;

// Fraction of the class running mean's magnitude at which an energy
// deviation costs one unit of score; smaller pinches the ID energies
// tighter around their class mean.
constexpr double kDeviationScale = 0.3;

// The binary uncertainty head scores a sample as sigmoid(u) with
// u = 1 - |E - mu_c| / (0.3 |mu_c|): the ID probability peaks when the
// energy sits on its class running mean and falls off with the scaled
// deviation. Training concentrates in-distribution energies around the
// class mean and drives virtual-outlier energies away from it; the
// deviation stays defined through E = 0, so outliers are not parked at a
// magnitude floor. Evaluation ranks by the matching class-scaled deviation
// (vos_epistemic_score).
double id_energy_score(double e, double class_mean, double floor) {
    const double scale = kDeviationScale * std::max(std::abs(class_mean), floor);
    return 1.0 - std::abs(e - class_mean) / scale;
}

double id_energy_score_grad(double e, double class_mean, double floor) {
    if (e == class_mean) return 0.0;
    const double sign = e > class_mean ? 1.0 : -1.0;
    return -sign / (kDeviationScale * std::max(std::abs(class_mean), floor));
}

}  // namespace

TrainResult train(MlpModel model, const LabeledDataset& ds,
                  std::span<const std::size_t> train_ids, const TrainConfig& config,
                  const std::optional<VosConfig>& vos_config) {
    if (train_ids.empty()) {
        throw EmptyBatch("train: no training samples");
    }
    if (config.batch_size < 1) {
        throw ConfigError("train: batch size must be >= 1");
    }

    TrainResult result;
    result.model = std::move(model);
    if (vos_config) {
        result.vos.emplace(result.model.class_count, *vos_config);
    }

    RngStream base(config.seed, 0x747261696e);  // training root stream
    SgdState sgd = make_sgd_state(result.model);
    std::vector<std::size_t> order(train_ids.begin(), train_ids.end());

    const std::size_t n = order.size();
    std::uint64_t batch_counter = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at(config, epoch);

        // Refit the class Gaussians from the bank once per epoch once the
        // warm-up is over and every class has enough features.
        VosState* vos = result.vos ? &*result.vos : nullptr;
        bool vos_active = false;
        if (vos && epoch >= vos->config.warmup_epochs) {
            bool enough = true;
            const std::size_t need = result.model.penultimate_dim() + 1;
            for (int c = 0; c < vos->bank.class_count(); ++c) {
                if (vos->bank.count(c) < need) enough = false;
            }
            if (enough) {
                vos->class_gaussians = fit_class_gaussians(vos->bank);
                vos_active = true;
            }
        }

        RngStream shuffle_rng = base.derive(kShuffleStream, epoch);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }

        double epoch_cls = 0.0;
        double epoch_uncert = 0.0;
        std::size_t epoch_uncert_batches = 0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const std::size_t b = stop - start;

            Gradients grads = zero_gradients(result.model);
            std::vector<ForwardTrace> traces(b);
            std::vector<LossValue> cls(b);
            std::vector<int> labels(b);

            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t row = order[start + i];
                labels[i] = ds.labels[row];
                // Dropout is an inference-time MC mechanism here; training
                // runs the deterministic forward pass.
                traces[i] = forward(result.model, ds.features.row(row), nullptr);
                cls[i] = config.loss == LossKind::cross_entropy
                             ? cross_entropy_loss(traces[i].logits(), labels[i])
                             : logit_norm_loss(traces[i].logits(), labels[i], config.tau);
                epoch_cls += cls[i].loss;
                const auto logits = traces[i].logits();
                const auto arg =
                    std::max_element(logits.begin(), logits.end()) - logits.begin();
                if (arg == labels[i]) ++correct;
                if (vos) vos->bank.push(traces[i].penultimate(), labels[i]);
            }

            // Classification gradient, mean-reduced over the batch.
            std::vector<std::vector<double>> dlogits(b);
            for (std::size_t i = 0; i < b; ++i) {
                dlogits[i] = cls[i].dlogits;
                for (double& v : dlogits[i]) v /= static_cast<double>(b);
            }

            if (vos_active) {
                const double floor = vos->config.energy_floor;
                std::vector<double> id_energy(b), id_scaled(b);
                for (std::size_t i = 0; i < b; ++i) {
                    id_energy[i] = energy(traces[i].logits());
                    update_running_energy_mean(*vos, labels[i], id_energy[i]);
                    id_scaled[i] = id_energy_score(id_energy[i],
                                                   vos->running_energy_mean[labels[i]], floor);
                }

                // One virtual outlier per ID sample, drawn from that
                // sample's own class Gaussian; draws are grouped per class.
                std::vector<std::size_t> class_count(result.model.class_count, 0);
                for (std::size_t i = 0; i < b; ++i) ++class_count[labels[i]];
                Matrix outliers(b, result.model.penultimate_dim());
                std::vector<int> outlier_class(b);
                std::size_t filled = 0;
                for (int c = 0; c < result.model.class_count; ++c) {
                    if (class_count[c] == 0) continue;
                    RngStream vos_rng =
                        base.derive(kOutlierStream, (batch_counter << 8) | static_cast<unsigned>(c));
                    // Bottom-t of ceil(t / epsilon) candidates realizes the
                    // epsilon-likelihood tail; the candidate count is capped.
                    const auto pool = static_cast<std::size_t>(std::min<double>(
                        vos->config.candidates,
                        std::ceil(static_cast<double>(class_count[c]) / vos->config.epsilon)));
                    const Matrix draw = sample_virtual_outliers(
                        vos->class_gaussians[c], class_count[c],
                        std::max(pool, class_count[c]), vos_rng);
                    for (std::size_t r = 0; r < draw.rows(); ++r, ++filled) {
                        std::copy(draw.row(r).begin(), draw.row(r).end(),
                                  outliers.row(filled).begin());
                        outlier_class[filled] = c;
                    }
                }

                const Layer& last = result.model.layers.back();
                std::vector<std::vector<double>> out_logits(b);
                std::vector<double> ood_energy(b), ood_scaled(b);
                for (std::size_t i = 0; i < b; ++i) {
                    out_logits[i] = matvec(last.weights, outliers.row(i));
                    for (std::size_t k = 0; k < out_logits[i].size(); ++k) {
                        out_logits[i][k] += last.bias[k];
                    }
                    ood_energy[i] = energy(out_logits[i]);
                    ood_scaled[i] = id_energy_score(
                        ood_energy[i], vos->running_energy_mean[outlier_class[i]], floor);
                }

                const UncertaintyLoss ul = uncertainty_loss(id_scaled, ood_scaled);
                epoch_uncert += ul.loss;
                ++epoch_uncert_batches;

                // dL/dlogit_k = dL/du * du/dE * (-softmax_k).
                for (std::size_t i = 0; i < b; ++i) {
                    const double chain =
                        config.beta * ul.did[i] *
                        id_energy_score_grad(id_energy[i], vos->running_energy_mean[labels[i]], floor);
                    if (chain != 0.0) {
                        const std::vector<double> p = softmax(traces[i].logits());
                        for (std::size_t k = 0; k < p.size(); ++k) {
                            dlogits[i][k] -= chain * p[k];
                        }
                    }
                }
                Matrix& gw = grads.weights.back();
                auto& gb = grads.bias.back();
                for (std::size_t i = 0; i < filled; ++i) {
                    const double chain =
                        config.beta * ul.dood[i] *
                        id_energy_score_grad(ood_energy[i], vos->running_energy_mean[outlier_class[i]], floor);
                    if (chain == 0.0) continue;
                    const std::vector<double> p = softmax(out_logits[i]);
                    const auto feat = outliers.row(i);
                    for (std::size_t k = 0; k < p.size(); ++k) {
                        const double dk = -chain * p[k];
                        gb[k] += dk;
                        auto grow = gw.row(k);
                        for (std::size_t j = 0; j < feat.size(); ++j) grow[j] += dk * feat[j];
                    }
                }
            }

            for (std::size_t i = 0; i < b; ++i) {
                backward(result.model, traces[i], dlogits[i], grads);
            }
            sgd_step(result.model, grads, lr, config.momentum, config.weight_decay, sgd);
            ++batch_counter;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.cls_loss = epoch_cls / static_cast<double>(n);
        stats.uncert_loss = epoch_uncert_batches > 0
                                ? epoch_uncert / static_cast<double>(epoch_uncert_batches)
                                : 0.0;
        stats.total_loss = stats.cls_loss + config.beta * stats.uncert_loss;
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        result.log.push_back(stats);
    }
    return result;
}

}  // namespace uq
