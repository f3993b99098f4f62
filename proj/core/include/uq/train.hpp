#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uq/dataset.hpp"
#include "uq/mlp.hpp"
#include "uq/vos.hpp"

namespace uq {

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double cls_loss = 0.0;
    double uncert_loss = 0.0;
    double total_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    MlpModel model;
    std::optional<VosState> vos;
    std::vector<EpochStats> log;
};

// Mini-batch SGD over the selected rows. When a VosConfig is given, the
// feature bank fills from epoch 0, the class Gaussians are refitted once
// per epoch after the warm-up, and each batch then adds
// beta * uncertainty_loss over the batch's scaled energies and a matching
// set of virtual outliers pushed through the final layer. Fully
// deterministic for a fixed config.seed.
TrainResult train(MlpModel model, const LabeledDataset& ds,
                  std::span<const std::size_t> train_ids, const TrainConfig& config,
                  const std::optional<VosConfig>& vos_config);

}  // namespace uq
