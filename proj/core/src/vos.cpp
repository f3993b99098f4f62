#include "uq/vos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uq/error.hpp"

namespace uq {

FeatureBank::FeatureBank(int class_count, std::size_t capacity)
    : capacity_(capacity), features_(class_count), next_slot_(class_count, 0) {}

void FeatureBank::push(std::span<const double> feature, int label) {
    if (label < 0 || label >= class_count()) {
        throw LabelOutOfRange("feature bank: label " + std::to_string(label));
    }
    Matrix& bank = features_[label];
    if (bank.rows() == 0) {
        bank = Matrix(0, feature.size());
    }
    if (bank.cols() != feature.size()) {
        throw DimensionMismatch("feature bank: feature dim " + std::to_string(feature.size()) +
                                " vs bank dim " + std::to_string(bank.cols()));
    }
    if (bank.rows() < capacity_) {
        auto& data = bank.data();
        data.insert(data.end(), feature.begin(), feature.end());
        bank = Matrix(bank.rows() + 1, feature.size(), std::move(data));
    } else {
        std::size_t& slot = next_slot_[label];
        std::copy(feature.begin(), feature.end(), bank.row(slot).begin());
        slot = (slot + 1) % capacity_;
    }
}

VosState::VosState(int class_count, VosConfig cfg)
    : config(cfg),
      bank(class_count, cfg.bank_capacity),
      running_energy_mean(class_count, 0.0),
      mean_seen(class_count, false) {}

std::vector<GaussianParams> fit_class_gaussians(const FeatureBank& bank) {
    std::vector<GaussianParams> out;
    for (int c = 0; c < bank.class_count(); ++c) {
        const Matrix& feats = bank.features(c);
        const std::size_t n = feats.rows();
        const std::size_t d = feats.cols();
        if (n < d + 1) {
            throw InsufficientSamples("fit_class_gaussians: class " + std::to_string(c) + " has " +
                                      std::to_string(n) + " features, needs " +
                                      std::to_string(d + 1));
        }
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = feats.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
        }
        for (double& v : mean) v /= static_cast<double>(n);

        Matrix cov(d, d);
        std::vector<double> centered(d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = feats.row(i);
            for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
            for (std::size_t a = 0; a < d; ++a) {
                const double ca = centered[a];
                auto cov_row = cov.row(a);
                for (std::size_t b = 0; b <= a; ++b) cov_row[b] += ca * centered[b];
            }
        }
        const double denom = static_cast<double>(n - 1);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                const double v = cov(a, b) / denom;
                cov(a, b) = v;
                cov(b, a) = v;
            }
        }
        out.push_back(make_gaussian(std::move(mean), cov));
    }
    return out;
}

Matrix sample_virtual_outliers(const GaussianParams& g, std::size_t t, std::size_t candidates,
                               RngStream& rng) {
    if (t == 0 || candidates < t) {
        throw ConfigError("sample_virtual_outliers: need candidates >= t >= 1, got t=" +
                          std::to_string(t) + " candidates=" + std::to_string(candidates));
    }
    const std::size_t d = g.dim();
    Matrix z(candidates, d);
    std::vector<double> norm_sq(candidates);
    for (std::size_t i = 0; i < candidates; ++i) {
        auto row = z.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = rng.next_normal();
            s += row[j] * row[j];
        }
        norm_sq[i] = s;
    }

    std::vector<std::size_t> order(candidates);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return norm_sq[a] > norm_sq[b];
    });

    Matrix out(t, d);
    for (std::size_t r = 0; r < t; ++r) {
        const auto zr = z.row(order[r]);
        auto row = out.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            double s = g.mean[i];
            for (std::size_t k = 0; k <= i; ++k) s += g.chol(i, k) * zr[k];
            row[i] = s;
        }
    }
    return out;
}

double energy(std::span<const double> logits) { return -logsumexp(logits); }

void update_running_energy_mean(VosState& state, int class_id, double e) {
    if (class_id < 0 || class_id >= static_cast<int>(state.running_energy_mean.size())) {
        throw LabelOutOfRange("update_running_energy_mean: class " + std::to_string(class_id));
    }
    const double m = state.config.running_mean_momentum;
    if (!(m >= 0.0 && m < 1.0)) {
        throw ConfigError("update_running_energy_mean: momentum must lie in [0, 1)");
    }
    double& mu = state.running_energy_mean[class_id];
    if (!state.mean_seen[class_id]) {
        mu = e;
        state.mean_seen[class_id] = true;
    } else {
        mu = m * mu + (1.0 - m) * e;
    }
}

double scaled_energy(double e, double class_running_mean, double energy_floor) {
    const double num = std::max(std::abs(class_running_mean), energy_floor);
    const double den = std::max(std::abs(e), energy_floor);
    return std::log(num / den);
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {
// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

UncertaintyLoss uncertainty_loss(std::span<const double> id_scaled,
                                 std::span<const double> ood_scaled) {
    if (id_scaled.empty() || ood_scaled.empty()) {
        throw EmptyBatch("uncertainty_loss: both populations must be nonempty");
    }
    const double n = static_cast<double>(id_scaled.size() + ood_scaled.size());
    UncertaintyLoss out;
    out.did.resize(id_scaled.size());
    out.dood.resize(ood_scaled.size());
    double total = 0.0;
    for (std::size_t i = 0; i < id_scaled.size(); ++i) {
        total += softplus(-id_scaled[i]);  // -log sigmoid(es)
        out.did[i] = (sigmoid(id_scaled[i]) - 1.0) / n;
    }
    for (std::size_t i = 0; i < ood_scaled.size(); ++i) {
        total += softplus(ood_scaled[i]);  // -log(1 - sigmoid(es))
        out.dood[i] = sigmoid(ood_scaled[i]) / n;
    }
    out.loss = total / n;
    return out;
}

}  // namespace uq
