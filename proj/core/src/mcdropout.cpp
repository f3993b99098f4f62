#include "uq/mcdropout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uq/error.hpp"
#include "uq/vos.hpp"

namespace uq {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::uint64_t kPassStream = 0x6d635f70;  // per-pass dropout masks

double entropy_of(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        const double q = std::max(v, kProbFloor);
        h -= q * std::log(q);
    }
    return h;
}

}  // namespace

McSamples mc_infer(const MlpModel& model, std::span<const double> x, std::size_t passes,
                   const RngStream& stream) {
    if (passes < 1) {
        throw ConfigError("mc_infer: need at least one pass");
    }
    McSamples s;
    s.probs = Matrix(passes, model.class_count);
    s.energies.resize(passes);
    for (std::size_t t = 0; t < passes; ++t) {
        RngStream pass_rng = stream.derive(kPassStream, t);
        const ForwardTrace trace = forward(model, x, &pass_rng);
        const std::vector<double> p = softmax(trace.logits());
        std::copy(p.begin(), p.end(), s.probs.row(t).begin());
        s.energies[t] = energy(trace.logits());
    }
    return s;
}

McSamples mc_from_logits(const Matrix& logits) {
    McSamples s;
    s.probs = Matrix(logits.rows(), logits.cols());
    s.energies.resize(logits.rows());
    for (std::size_t t = 0; t < logits.rows(); ++t) {
        const std::vector<double> p = softmax(logits.row(t));
        std::copy(p.begin(), p.end(), s.probs.row(t).begin());
        s.energies[t] = energy(logits.row(t));
    }
    return s;
}

McSummary summarize(const McSamples& samples) {
    const std::size_t t_count = samples.passes();
    const std::size_t k_count = samples.classes();
    if (t_count < 1 || k_count < 1) {
        throw DimensionMismatch("summarize: empty sample matrix");
    }
    if (samples.energies.size() != t_count) {
        throw DimensionMismatch("summarize: " + std::to_string(samples.energies.size()) +
                                " energies for " + std::to_string(t_count) + " passes");
    }

    McSummary out;
    out.mean_probs.assign(k_count, 0.0);
    for (std::size_t t = 0; t < t_count; ++t) {
        const auto row = samples.probs.row(t);
        for (std::size_t k = 0; k < k_count; ++k) out.mean_probs[k] += row[k];
    }
    for (double& v : out.mean_probs) v /= static_cast<double>(t_count);
    out.predicted = static_cast<int>(
        std::max_element(out.mean_probs.begin(), out.mean_probs.end()) - out.mean_probs.begin());

    out.entropy = entropy_of(out.mean_probs);

    double mean_pass_entropy = 0.0;
    double ekl = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
        const auto row = samples.probs.row(t);
        mean_pass_entropy += entropy_of(row);
        for (std::size_t k = 0; k < k_count; ++k) {
            const double ph = std::max(out.mean_probs[k], kProbFloor);
            const double pt = std::max(row[k], kProbFloor);
            ekl += ph * std::log(ph / pt);
        }
    }
    mean_pass_entropy /= static_cast<double>(t_count);
    out.mutual_information = out.entropy - mean_pass_entropy;
    out.expected_kl = ekl / static_cast<double>(t_count);

    out.class_variances.assign(k_count, 0.0);
    for (std::size_t t = 0; t < t_count; ++t) {
        const auto row = samples.probs.row(t);
        for (std::size_t k = 0; k < k_count; ++k) {
            const double d = row[k] - out.mean_probs[k];
            out.class_variances[k] += d * d;
        }
    }
    double var_sum = 0.0;
    for (double& v : out.class_variances) {
        v /= static_cast<double>(t_count);
        var_sum += v;
    }
    out.predictive_variance = var_sum / static_cast<double>(k_count);

    double e_mean = 0.0;
    for (double e : samples.energies) e_mean += e;
    e_mean /= static_cast<double>(t_count);
    double e_var = 0.0;
    for (double e : samples.energies) e_var += (e - e_mean) * (e - e_mean);
    out.energy_mean = e_mean;
    out.energy_variance = e_var / static_cast<double>(t_count);
    out.epistemic = -e_mean;
    return out;
}

double epistemic_score(const McSummary& summary) { return summary.epistemic; }

std::vector<double> combined_scores(std::span<const McSummary> batch, double w_mi,
                                    double w_energy) {
    std::vector<double> out(batch.size(), 0.0);
    if (batch.empty()) return out;

    const auto add_component = [&](auto&& raw, double weight) {
        if (weight == 0.0) return;
        double lo = raw(batch[0]);
        double hi = lo;
        for (const auto& s : batch) {
            lo = std::min(lo, raw(s));
            hi = std::max(hi, raw(s));
        }
        if (!(hi > lo)) return;  // degenerate: constant component contributes 0
        for (std::size_t i = 0; i < batch.size(); ++i) {
            out[i] += weight * (raw(batch[i]) - lo) / (hi - lo);
        }
    };

    add_component([](const McSummary& s) { return epistemic_score(s); }, w_energy);
    add_component([](const McSummary& s) { return -s.mutual_information; }, w_mi);
    return out;
}

}  // namespace uq
