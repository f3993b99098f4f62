#pragma once

#include <cstddef>
#include <vector>

#include "uq/gaussian.hpp"
#include "uq/matrix.hpp"
#include "uq/rng.hpp"

namespace uq {

struct LabeledDataset {
    Matrix features;          // n x d
    std::vector<int> labels;  // values in [0, class_count)
    int class_count = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }
};

struct SplitIndices {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> test_ids;
};

// Cluster geometry for the synthetic planar experiment: one Gaussian per
// class.
struct ClusterSpec {
    std::vector<std::vector<double>> means;  // C x d
    std::vector<Matrix> covariances;         // C of d x d
};

// C classes, the first C-1 means equally spaced on a circle of `radius` and
// the last at the origin, all with unit covariance. The overlap at the
// center is what makes the intra-class uncertainty visible.
ClusterSpec default_toy_clusters(int class_count = 5, double radius = 4.0);

// per_class points drawn from each class Gaussian, labels 0..C-1 in block
// order. Deterministic per stream.
LabeledDataset make_clusters(const ClusterSpec& spec, std::size_t per_class, RngStream& rng);

// n points uniform on the axis-aligned box [lo, hi]^d; labels are all -1
// (class_count 0). Used as the synthetic background OOD population.
LabeledDataset make_uniform_background(std::size_t n, double lo, double hi, std::size_t d,
                                       RngStream& rng);

// Per-class stratified split; round(fraction * n_c) training samples from
// every class c. Deterministic per stream.
SplitIndices split(const LabeledDataset& ds, double fraction, RngStream& rng);

// Rows of ds selected by ids (features and labels).
LabeledDataset gather(const LabeledDataset& ds, const std::vector<std::size_t>& ids);

}  // namespace uq
