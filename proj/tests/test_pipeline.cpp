#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "uq/pipeline.hpp"

using namespace uq;

namespace {

RunConfig tiny_toy(const std::string& preset, std::uint64_t seed) {
    RunConfig config;
    config.apply_preset(preset);
    config.set("seed", std::to_string(seed));
    config.set("toy.per_class", "60");
    config.set("train.epochs", "40");
    config.set("vos.warmup", "5");
    config.set("ood.n", "150");
    return config;
}

double report_auroc(const EvalRun& run, const std::string& score) {
    for (const auto& r : run.reports) {
        if (r.score_name == score) return r.auroc;
    }
    FAIL("missing report basis");
    return 0.0;
}

}  // namespace

TEST_CASE("vos_epistemic_score prefers samples matching the class statistics") {
    VosState state(2, {});
    state.running_energy_mean = {-10.0, -6.0};
    state.mean_seen = {true, true};
    state.class_gaussians.push_back(make_gaussian({1.0, 0.0}, Matrix::identity(2)));
    state.class_gaussians.push_back(make_gaussian({-1.0, 0.0}, Matrix::identity(2)));

    McSummary on_mean;
    on_mean.predicted = 0;
    on_mean.energy_mean = -10.0;
    on_mean.energy_variance = 0.0;
    const std::vector<double> near_feature = {1.0, 0.1};
    const double base = vos_epistemic_score(on_mean, near_feature, state);

    // Deviating mean energy lowers the score.
    McSummary shifted = on_mean;
    shifted.energy_mean = -20.0;
    CHECK(vos_epistemic_score(shifted, near_feature, state) < base);

    // Extra per-pass spread lowers the score.
    McSummary noisy = on_mean;
    noisy.energy_variance = 9.0;
    CHECK(vos_epistemic_score(noisy, near_feature, state) < base);

    // An off-manifold feature vetoes an otherwise perfect energy profile.
    const std::vector<double> far_feature = {30.0, -40.0};
    CHECK(vos_epistemic_score(on_mean, far_feature, state) < base - 10.0);
}

TEST_CASE("run_train is deterministic and honors the data pipeline") {
    const RunConfig config = tiny_toy("toy-vos", 5);
    const TrainRun a = run_train(config);
    const TrainRun b = run_train(config);
    REQUIRE(a.log.size() == 40);
    for (std::size_t l = 0; l < a.checkpoint.model.layers.size(); ++l) {
        CHECK(a.checkpoint.model.layers[l].weights.data() ==
              b.checkpoint.model.layers[l].weights.data());
    }
    CHECK(a.checkpoint.vos.has_value());
    CHECK(a.checkpoint.vos->gaussians_ready());
    CHECK(a.checkpoint.vos->running_energy_mean == b.checkpoint.vos->running_energy_mean);

    const EvalData data = build_eval_data(config);
    CHECK(data.id_test.size() == 60);  // 20% of 300
    CHECK(data.ood.size() == 150);
}

TEST_CASE("combined score is no worse than its weakest component on the toy task") {
    double combined_sum = 0.0, floor_sum = 0.0;
    for (std::uint64_t seed : {21, 22, 23}) {
        RunConfig config = tiny_toy("toy-vos", seed);
        config.set("eval.stochastic", "true");
        config.set("eval.passes", "10");
        const TrainRun run = run_train(config);
        const EvalRun eval = run_eval(config, run.checkpoint);
        const double combined = report_auroc(eval, "combined");
        const double energy = report_auroc(eval, "energy");
        const double mi = report_auroc(eval, "neg_mi");
        combined_sum += combined;
        floor_sum += std::min(energy, mi);
    }
    CHECK(combined_sum >= floor_sum);
}

TEST_CASE("eval reports carry both FPR95 conventions and accuracy") {
    const RunConfig config = tiny_toy("toy-baseline", 9);
    const TrainRun run = run_train(config);
    const EvalRun eval = run_eval(config, run.checkpoint);
    REQUIRE(eval.reports.size() == 3);
    for (const auto& report : eval.reports) {
        CHECK(report.fpr95_id >= 0.0);
        CHECK(report.fpr95_id <= 1.0);
        CHECK(report.fpr95_ood >= 0.0);
        CHECK(report.fpr95_ood <= 1.0);
        CHECK(report.id_accuracy > 0.5);
        CHECK(report.ece >= 0.0);
    }
    // 60 ID rows and 150 OOD rows, each scored once.
    CHECK(eval.rows.size() == 210);
    std::size_t id_rows = 0;
    for (const auto& row : eval.rows) {
        if (row.domain == Domain::id) ++id_rows;
    }
    CHECK(id_rows == 60);
}

TEST_CASE("run_map emits aligned grids") {
    RunConfig config = tiny_toy("toy-vos", 11);
    config.set("map.resolution", "9");
    config.set("map.lo", "-6");
    config.set("map.hi", "6");
    const TrainRun run = run_train(config);
    const MapRun maps = run_map(config, run.checkpoint);
    CHECK(maps.aleatoric.values.size() == 81);
    CHECK(maps.epistemic.values.size() == 81);
    CHECK(maps.combined.values.size() == 81);
    // Epistemic uncertainty in a far corner exceeds the grid minimum.
    const double corner = maps.epistemic.values[0];
    const double min_val =
        *std::min_element(maps.epistemic.values.begin(), maps.epistemic.values.end());
    CHECK(corner > min_val);
}
