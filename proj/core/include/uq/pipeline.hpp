#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uq/checkpoint.hpp"
#include "uq/config.hpp"
#include "uq/csv.hpp"
#include "uq/dataset.hpp"
#include "uq/mcdropout.hpp"
#include "uq/metrics.hpp"
#include "uq/train.hpp"

namespace uq {

// Data assembled from the data.*/toy.*/split.*/ood.* keys. For toy data the
// ID test rows are the held-out split; OOD rows come from the uniform
// background (or a CSV).
struct EvalData {
    LabeledDataset id_test;
    LabeledDataset ood;  // may be empty when ood.kind = none
};

struct TrainRun {
    Checkpoint checkpoint;
    std::vector<EpochStats> log;
};

TrainRun run_train(const RunConfig& config);

LabeledDataset build_training_data(const RunConfig& config, SplitIndices* split_out);
EvalData build_eval_data(const RunConfig& config);

struct ScoredRow {
    std::string sample_id;
    int label = -1;
    int pred = -1;
    Domain domain = Domain::id;
    McSummary summary;
};

struct EvalRun {
    std::vector<ScoredRow> rows;
    std::vector<MetricReport> reports;  // per score basis: combined, energy, neg_mi
    MiRatios mi_ratios;
    bool has_mi_ratios = false;
};

// MC (or single deterministic pass) evaluation of a checkpointed model over
// the config's ID/OOD data. `threads` > 1 fans samples out to workers;
// results are aggregated in sample order, so the output is identical to the
// serial schedule.
EvalRun run_eval(const RunConfig& config, const Checkpoint& ckpt);

// Same scoring path, fed by an external logit dump instead of a model.
EvalRun run_eval_dump(const RunConfig& config, const LogitDump& dump);

// Energy-based detection score for VOS checkpoints, higher = more ID-like:
// the minimum of two heads that must both look in-distribution. The energy
// head is the class-scaled deviation of the MC mean energy from the
// predicted class's running mean plus three times the MC energy spread
// (wide per-pass energy variation marks low-confidence samples). The
// feature head is the best class-conditional log-density of the
// deterministic penultimate features, the same density whose epsilon-tail
// defines the virtual outliers.
double vos_epistemic_score(const McSummary& summary, std::span<const double> penultimate,
                           const VosState& state);

// Scored-sample CSV: sample_id,label,pred,domain,mi,ekl,var,entropy,
// energy_mean,energy_var,combined.
void write_scored_csv(const std::string& path, const std::vector<ScoredRow>& rows);
std::vector<ScoredRow> load_scored_csv(const std::string& path);

// Builds the three metric reports (+ MI ratios when the groups exist) from
// scored rows; used by run_eval and by the report command.
EvalRun evaluate_rows(std::vector<ScoredRow> rows, const std::string& dataset_name, double w_mi,
                      double w_energy, int histogram_bins);

void write_epoch_log_csv(const std::string& path, const std::vector<EpochStats>& log);

struct GridMap {
    std::size_t resolution = 0;
    double lo = 0.0, hi = 0.0;
    std::vector<double> values;  // row-major, y outer (ascending), x inner
};

struct MapRun {
    GridMap aleatoric;  // mutual information
    GridMap epistemic;  // energy uncertainty (-epistemic_score, mean energy)
    GridMap combined;   // (w_mi + w_energy) - combined score
};

// Planar models only (input dim 2); one MC summary per grid cell.
MapRun run_map(const RunConfig& config, const Checkpoint& ckpt);

void write_map_csv(const std::string& path, const GridMap& map);

}  // namespace uq
