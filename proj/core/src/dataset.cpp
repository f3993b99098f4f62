#include "uq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uq/error.hpp"

namespace uq {

ClusterSpec default_toy_clusters(int class_count, double radius) {
    if (class_count < 2) {
        throw ConfigError("default_toy_clusters: need at least 2 classes, got " +
                          std::to_string(class_count));
    }
    ClusterSpec spec;
    const int ring = class_count - 1;
    for (int c = 0; c < ring; ++c) {
        const double a = 2.0 * std::numbers::pi * c / ring;
        spec.means.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    spec.means.push_back({0.0, 0.0});
    for (int c = 0; c < class_count; ++c) spec.covariances.push_back(Matrix::identity(2));
    return spec;
}

LabeledDataset make_clusters(const ClusterSpec& spec, std::size_t per_class, RngStream& rng) {
    const std::size_t c_count = spec.means.size();
    if (c_count < 2) {
        throw ConfigError("make_clusters: need at least 2 classes");
    }
    if (spec.covariances.size() != c_count) {
        throw DimensionMismatch("make_clusters: " + std::to_string(c_count) + " means vs " +
                                std::to_string(spec.covariances.size()) + " covariances");
    }
    const std::size_t d = spec.means[0].size();
    if (d < 2) {
        throw ConfigError("make_clusters: dimension must be >= 2");
    }

    LabeledDataset ds;
    ds.class_count = static_cast<int>(c_count);
    ds.features = Matrix(c_count * per_class, d);
    ds.labels.resize(c_count * per_class);

    for (std::size_t c = 0; c < c_count; ++c) {
        GaussianParams g;
        try {
            g = make_gaussian(spec.means[c], spec.covariances[c]);
        } catch (const NotPositiveDefinite& e) {
            throw DegenerateCovariance("make_clusters: class " + std::to_string(c) + ": " +
                                       e.what());
        }
        RngStream cluster_rng = rng.derive(0x636c7573, c);  // per-class substream
        Matrix draws = sample_gaussian(g, per_class, cluster_rng);
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            std::copy(draws.row(i).begin(), draws.row(i).end(), ds.features.row(r).begin());
            ds.labels[r] = static_cast<int>(c);
        }
    }
    return ds;
}

LabeledDataset make_uniform_background(std::size_t n, double lo, double hi, std::size_t d,
                                       RngStream& rng) {
    if (hi <= lo) {
        throw ConfigError("make_uniform_background: hi must exceed lo");
    }
    LabeledDataset ds;
    ds.class_count = 0;
    ds.features = Matrix(n, d);
    ds.labels.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = ds.features.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = lo + (hi - lo) * rng.next_double();
    }
    return ds;
}

SplitIndices split(const LabeledDataset& ds, double fraction, RngStream& rng) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split: fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(ds.class_count);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by_class[ds.labels[i]].push_back(i);
    }

    SplitIndices out;
    for (int c = 0; c < ds.class_count; ++c) {
        auto& ids = by_class[c];
        if (ids.size() < 2) {
            throw ClassTooSmall("split: class " + std::to_string(c) + " has " +
                                std::to_string(ids.size()) + " samples, need at least 2");
        }
        RngStream class_rng = rng.derive(0x73706c69, c);
        // Fisher-Yates on the class indices.
        for (std::size_t i = ids.size() - 1; i > 0; --i) {
            const std::size_t j = class_rng.next_below(i + 1);
            std::swap(ids[i], ids[j]);
        }
        const auto n_train =
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            (i < n_train ? out.train_ids : out.test_ids).push_back(ids[i]);
        }
    }
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    return out;
}

LabeledDataset gather(const LabeledDataset& ds, const std::vector<std::size_t>& ids) {
    LabeledDataset out;
    out.class_count = ds.class_count;
    out.features = Matrix(ids.size(), ds.dim());
    out.labels.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::copy(ds.features.row(ids[i]).begin(), ds.features.row(ids[i]).end(),
                  out.features.row(i).begin());
        out.labels[i] = ds.labels[ids[i]];
    }
    return out;
}

}  // namespace uq
