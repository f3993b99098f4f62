#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uq/gaussian.hpp"
#include "uq/matrix.hpp"
#include "uq/rng.hpp"

namespace uq {

struct VosConfig {
    int warmup_epochs = 10;          // classification-only epochs before the
                                     // Gaussians are first fitted
    double epsilon = 0.05;           // likelihood-tail quantile the outliers
                                     // are drawn from: t draws use
                                     // ceil(t / epsilon) candidates
    int candidates = 10000;          // cap on candidates drawn per batch
    std::size_t bank_capacity = 1000;  // per-class feature ring buffer
    double running_mean_momentum = 0.9;
    double energy_floor = 1e-6;      // magnitude floor inside scaled_energy
};

struct EnergyScore {
    double value = 0.0;  // -logsumexp(logits)
    int class_id = -1;   // class whose running mean scales it
};

// Ring buffer of penultimate features per class.
class FeatureBank {
  public:
    FeatureBank() = default;
    FeatureBank(int class_count, std::size_t capacity);

    void push(std::span<const double> feature, int label);
    std::size_t count(int label) const { return features_[label].rows(); }
    const Matrix& features(int label) const { return features_[label]; }
    int class_count() const { return static_cast<int>(features_.size()); }

  private:
    std::size_t capacity_ = 0;
    std::vector<Matrix> features_;
    std::vector<std::size_t> next_slot_;
};

struct VosState {
    VosConfig config;
    FeatureBank bank;
    std::vector<GaussianParams> class_gaussians;  // empty until first fit
    std::vector<double> running_energy_mean;
    std::vector<bool> mean_seen;

    explicit VosState(int class_count = 0, VosConfig cfg = {});
    bool gaussians_ready() const { return !class_gaussians.empty(); }
};

// Sample mean + unbiased sample covariance per class, regularized through
// make_gaussian. Every class needs at least d+1 banked features.
std::vector<GaussianParams> fit_class_gaussians(const FeatureBank& bank);

// Draws `candidates` points from g and returns the t with the lowest
// gaussian_logpdf, lowest first. The density ordering uses the exact
// z-norm of each draw (logpdf of mu + L z is a constant minus |z|^2/2), so
// only the selected points are ever materialized.
Matrix sample_virtual_outliers(const GaussianParams& g, std::size_t t, std::size_t candidates,
                               RngStream& rng);

// E(x) = -logsumexp(logits).
double energy(std::span<const double> logits);

// mu <- m*mu + (1-m)*e; the first observation initializes mu = e.
void update_running_energy_mean(VosState& state, int class_id, double e);

// log(|mu_c| / |E|) with both magnitudes floored at energy_floor. Energies
// here are typically negative, which makes the plain log-ratio of signed
// values undefined; the magnitude-with-floor form keeps the score finite
// for every input and equals the signed ratio whenever mu and E share a
// sign. Isolated here so the convention can be swapped in one place.
double scaled_energy(double e, double class_running_mean, double energy_floor);

struct UncertaintyLoss {
    double loss = 0.0;
    std::vector<double> did;   // dloss/dES for each ID entry
    std::vector<double> dood;  // dloss/dES for each outlier entry
};

// Binary cross-entropy with sigmoid(ES) as the ID probability: targets 1
// for ID entries, 0 for virtual outliers, mean-reduced over all entries.
UncertaintyLoss uncertainty_loss(std::span<const double> id_scaled,
                                 std::span<const double> ood_scaled);

double sigmoid(double x);

}  // namespace uq
