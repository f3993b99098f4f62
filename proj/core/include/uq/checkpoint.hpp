#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "uq/mlp.hpp"
#include "uq/vos.hpp"

namespace uq {

// Everything needed to reproduce inference and training-time energy
// scaling. Layout (versioned, little-endian):
//   magic "UQKNET01"
//   u32 loss_kind, f64 dropout, f64 tau, f64 beta, u64 seed
//   u32 class_count, u32 layer_count
//   per layer: u32 rows, u32 cols, f64[rows*cols] weights, f64[rows] bias
//   u8 vos_present; when 1:
//     u32 feature_dim, u32 warmup, f64 epsilon, u32 candidates,
//     u64 bank_capacity,
//     f64 running_mean_momentum, f64 energy_floor
//     per class: f64[d] mean, f64[d*d] covariance, f64 running_energy_mean,
//                u8 mean_seen
struct Checkpoint {
    MlpModel model;
    std::optional<VosState> vos;  // bank not persisted, Gaussians are
    std::uint32_t loss_kind = 0;  // 0 cross-entropy, 1 logit-norm
    double tau = 0.04;
    double beta = 0.1;
    std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uq
