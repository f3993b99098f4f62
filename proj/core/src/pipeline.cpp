#include "uq/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "uq/error.hpp"

namespace uq {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;
constexpr std::uint64_t kSplitStream = 0x73706c74;
constexpr std::uint64_t kOodStream = 0x6f6f6430;
constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kEvalStream = 0x6576616c;

LabeledDataset load_feature_csv(const std::string& path, const char* what) {
    CsvContent content = load_csv(path);
    if (!std::holds_alternative<LabeledDataset>(content)) {
        throw SchemaError(std::string(what) + ": '" + path +
                          "' holds logits, expected a feature file");
    }
    return std::get<LabeledDataset>(std::move(content));
}

LabeledDataset build_full_dataset(const RunConfig& config) {
    const std::string kind = config.get("data.kind");
    if (kind == "csv") {
        return load_feature_csv(config.get("data.path"), "data.path");
    }
    if (kind != "toy") {
        throw ConfigError("key 'data.kind': '" + kind + "' is not toy|csv");
    }
    const ClusterSpec spec = default_toy_clusters(static_cast<int>(config.get_int("toy.classes")),
                                                  config.get_double("toy.radius"));
    RngStream rng(static_cast<std::uint64_t>(config.get_int("seed")), kDataStream);
    return make_clusters(spec, static_cast<std::size_t>(config.get_int("toy.per_class")), rng);
}

// Single deterministic pass wrapped as a 1-row McSamples.
McSamples deterministic_samples(const MlpModel& model, std::span<const double> x) {
    const ForwardTrace trace = forward(model, x, nullptr);
    McSamples s;
    s.probs = Matrix(1, model.class_count);
    const std::vector<double> p = softmax(trace.logits());
    std::copy(p.begin(), p.end(), s.probs.row(0).begin());
    s.energies = {energy(trace.logits())};
    return s;
}

}  // namespace

LabeledDataset build_training_data(const RunConfig& config, SplitIndices* split_out) {
    LabeledDataset full = build_full_dataset(config);
    RngStream split_rng(static_cast<std::uint64_t>(config.get_int("seed")), kSplitStream);
    SplitIndices idx = split(full, config.get_double("split.fraction"), split_rng);
    if (split_out) *split_out = idx;
    return full;
}

TrainRun run_train(const RunConfig& config) {
    SplitIndices idx;
    const LabeledDataset full = build_training_data(config, &idx);

    std::vector<std::size_t> dims;
    dims.push_back(full.dim());
    for (std::size_t h : config.get_size_list("model.hidden")) dims.push_back(h);
    dims.push_back(static_cast<std::size_t>(full.class_count));

    const TrainConfig tcfg = config.train_config();
    RngStream init_rng(tcfg.seed, kInitStream);
    MlpModel model =
        make_mlp(dims, config.get_double("model.dropout"), full.class_count, init_rng);

    std::optional<VosConfig> vcfg;
    if (config.vos_enabled()) vcfg = config.vos_config();

    TrainResult result = train(std::move(model), full, idx.train_ids, tcfg, vcfg);

    TrainRun run;
    run.checkpoint.model = std::move(result.model);
    run.checkpoint.vos = std::move(result.vos);
    run.checkpoint.loss_kind = tcfg.loss == LossKind::logit_norm ? 1 : 0;
    run.checkpoint.tau = tcfg.tau;
    run.checkpoint.beta = tcfg.beta;
    run.checkpoint.seed = tcfg.seed;
    run.log = std::move(result.log);
    return run;
}

EvalData build_eval_data(const RunConfig& config) {
    EvalData data;
    SplitIndices idx;
    const LabeledDataset full = build_training_data(config, &idx);
    data.id_test = gather(full, idx.test_ids);

    const std::string ood_kind = config.get("ood.kind");
    if (ood_kind == "uniform") {
        RngStream rng(static_cast<std::uint64_t>(config.get_int("seed")), kOodStream);
        data.ood = make_uniform_background(static_cast<std::size_t>(config.get_int("ood.n")),
                                           config.get_double("ood.lo"),
                                           config.get_double("ood.hi"), full.dim(), rng);
    } else if (ood_kind == "csv") {
        data.ood = load_feature_csv(config.get("ood.path"), "ood.path");
        data.ood.labels.assign(data.ood.size(), -1);
    } else if (ood_kind != "none") {
        throw ConfigError("key 'ood.kind': '" + ood_kind + "' is not uniform|csv|none");
    }
    return data;
}

EvalRun evaluate_rows(std::vector<ScoredRow> rows, const std::string& dataset_name, double w_mi,
                      double w_energy, int histogram_bins) {
    std::vector<McSummary> summaries;
    summaries.reserve(rows.size());
    for (const auto& r : rows) summaries.push_back(r.summary);
    const std::vector<double> combined = combined_scores(summaries, w_mi, w_energy);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].summary.combined = combined[i];

    EvalRun run;

    double id_correct = 0.0, id_total = 0.0;
    std::vector<ConfidenceOutcome> outcomes;
    std::vector<double> mi_correct, mi_incorrect, mi_ood;
    for (const auto& r : rows) {
        if (r.domain == Domain::id) {
            if (r.label >= 0) {
                id_total += 1.0;
                const bool ok = r.pred == r.label;
                if (ok) id_correct += 1.0;
                const double conf = r.summary.mean_probs.empty()
                                        ? 0.0
                                        : *std::max_element(r.summary.mean_probs.begin(),
                                                            r.summary.mean_probs.end());
                outcomes.push_back({conf, ok});
                (ok ? mi_correct : mi_incorrect).push_back(r.summary.mutual_information);
            }
        } else {
            mi_ood.push_back(r.summary.mutual_information);
        }
    }

    struct ScoreBasis {
        const char* name;
        double (*value)(const McSummary&);
    };
    const ScoreBasis bases[] = {
        {"combined", [](const McSummary& s) { return s.combined; }},
        {"energy", [](const McSummary& s) { return epistemic_score(s); }},
        {"neg_mi", [](const McSummary& s) { return -s.mutual_information; }},
    };
    for (const auto& basis : bases) {
        ScoredPopulations pops;
        for (const auto& r : rows) {
            (r.domain == Domain::id ? pops.id_scores : pops.ood_scores)
                .push_back(basis.value(r.summary));
        }
        if (pops.id_scores.empty() || pops.ood_scores.empty()) continue;
        MetricReport report = compute_report(pops, dataset_name, basis.name, histogram_bins);
        report.id_accuracy = id_total > 0.0 ? id_correct / id_total : 0.0;
        report.ece = calibration_error(outcomes);
        run.reports.push_back(std::move(report));
    }

    if (!mi_correct.empty() && !mi_incorrect.empty() && !mi_ood.empty()) {
        run.mi_ratios = mi_ratio_report(mi_correct, mi_incorrect, mi_ood);
        run.has_mi_ratios = true;
    }
    run.rows = std::move(rows);
    return run;
}

namespace {
constexpr double kEnergySpreadWeight = 3.0;
constexpr double kFeatureDensityWeight = 0.05;
}  // namespace

double vos_epistemic_score(const McSummary& summary, std::span<const double> penultimate,
                           const VosState& state) {
    const double mu = state.running_energy_mean[summary.predicted];
    const double scale = std::max(std::abs(mu), state.config.energy_floor);
    const double energy_head = -(std::abs(summary.energy_mean - mu) +
                                 kEnergySpreadWeight * std::sqrt(summary.energy_variance)) /
                               scale;
    double density = -std::numeric_limits<double>::infinity();
    for (const auto& g : state.class_gaussians) {
        density = std::max(density, gaussian_logpdf(penultimate, g));
    }
    return std::min(energy_head, kFeatureDensityWeight * density);
}

EvalRun run_eval(const RunConfig& config, const Checkpoint& ckpt) {
    const EvalData data = build_eval_data(config);
    const bool stochastic = config.get_bool("eval.stochastic");
    const auto passes = static_cast<std::size_t>(config.get_int("eval.passes"));
    if (passes < 1) {
        throw ConfigError("key 'eval.passes': must be >= 1");
    }
    const RngStream eval_rng(static_cast<std::uint64_t>(config.get_int("eval.seed")),
                             kEvalStream);

    struct Input {
        std::string sample_id;
        int label;
        Domain domain;
        std::span<const double> x;
    };
    std::vector<Input> inputs;
    for (std::size_t i = 0; i < data.id_test.size(); ++i) {
        inputs.push_back({"id_" + std::to_string(i), data.id_test.labels[i], Domain::id,
                          data.id_test.features.row(i)});
    }
    for (std::size_t i = 0; i < data.ood.size(); ++i) {
        inputs.push_back({"ood_" + std::to_string(i), -1, Domain::ood, data.ood.features.row(i)});
    }
    if (data.id_test.dim() != ckpt.model.input_dim()) {
        throw InconsistentShape("eval: data dim " + std::to_string(data.id_test.dim()) +
                                " vs model input dim " + std::to_string(ckpt.model.input_dim()));
    }

    const bool vos_scaling = ckpt.vos.has_value() && ckpt.vos->gaussians_ready();
    std::vector<ScoredRow> rows(inputs.size());
    const auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Input& in = inputs[i];
            const McSamples samples =
                stochastic ? mc_infer(ckpt.model, in.x, passes, eval_rng.derive(0x73616d70, i))
                           : deterministic_samples(ckpt.model, in.x);
            ScoredRow row;
            row.sample_id = in.sample_id;
            row.label = in.label;
            row.domain = in.domain;
            row.summary = summarize(samples);
            if (vos_scaling) {
                const ForwardTrace trace = forward(ckpt.model, in.x, nullptr);
                row.summary.epistemic =
                    vos_epistemic_score(row.summary, trace.penultimate(), *ckpt.vos);
            }
            row.pred = row.summary.predicted;
            rows[i] = std::move(row);
        }
    };

    const auto threads = static_cast<std::size_t>(std::max<std::int64_t>(
        1, config.get_int("threads")));
    if (threads <= 1 || inputs.size() < 2 * threads) {
        score_range(0, inputs.size());
    } else {
        // Sample i always uses the stream derived from its own index, so
        // the partition has no effect on the result.
        std::vector<std::thread> workers;
        const std::size_t chunk = (inputs.size() + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(inputs.size(), begin + chunk);
            if (begin >= end) break;
            workers.emplace_back(score_range, begin, end);
        }
        for (auto& t : workers) t.join();
    }

    return evaluate_rows(std::move(rows), config.get("data.kind") == "toy" ? "toy" : "csv",
                         config.get_double("eval.w_mi"), config.get_double("eval.w_energy"),
                         static_cast<int>(config.get_int("eval.bins")));
}

EvalRun run_eval_dump(const RunConfig& config, const LogitDump& dump) {
    std::vector<ScoredRow> rows;
    rows.reserve(dump.size());
    for (std::size_t i = 0; i < dump.size(); ++i) {
        ScoredRow row;
        row.sample_id = dump.sample_ids[i];
        row.label = dump.labels[i];
        row.domain = dump.domains[i];
        row.summary = summarize(mc_from_logits(dump.logits[i]));
        row.pred = row.summary.predicted;
        rows.push_back(std::move(row));
    }
    return evaluate_rows(std::move(rows), "dump", config.get_double("eval.w_mi"),
                         config.get_double("eval.w_energy"),
                         static_cast<int>(config.get_int("eval.bins")));
}

void write_scored_csv(const std::string& path, const std::vector<ScoredRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "sample_id,label,pred,domain,mi,ekl,var,entropy,energy_mean,energy_var,combined\n";
    for (const auto& r : rows) {
        out << r.sample_id << "," << r.label << "," << r.pred << "," << domain_name(r.domain)
            << "," << format_double(r.summary.mutual_information) << ","
            << format_double(r.summary.expected_kl) << ","
            << format_double(r.summary.predictive_variance) << ","
            << format_double(r.summary.entropy) << "," << format_double(r.summary.energy_mean)
            << "," << format_double(r.summary.energy_variance) << ","
            << format_double(r.summary.combined) << "\n";
    }
}

std::vector<ScoredRow> load_scored_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw SchemaError("'" + path + "' is empty, expected a header row");
    }
    if (header.ends_with("\r")) header.pop_back();
    const std::string expected =
        "sample_id,label,pred,domain,mi,ekl,var,entropy,energy_mean,energy_var,combined";
    if (header != expected) {
        throw SchemaError("'" + path + "': scored CSV header mismatch, expected '" + expected +
                          "'");
    }
    std::vector<ScoredRow> rows;
    std::string line;
    std::size_t line_no = 1;
    const auto parse_num = [&](const std::string& s, std::size_t col) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ", column " +
                             std::to_string(col) + ": '" + s + "' is not a number");
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        f.push_back(cur);
        if (f.size() != 11) {
            throw InconsistentShape(path + ": line " + std::to_string(line_no) + ": expected 11 "
                                    "fields, got " + std::to_string(f.size()));
        }
        ScoredRow r;
        r.sample_id = f[0];
        r.label = static_cast<int>(parse_num(f[1], 2));
        r.pred = static_cast<int>(parse_num(f[2], 3));
        if (f[3] == "id") {
            r.domain = Domain::id;
        } else if (f[3] == "ood") {
            r.domain = Domain::ood;
        } else {
            throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": domain must be 'id' or 'ood'");
        }
        r.summary.mutual_information = parse_num(f[4], 5);
        r.summary.expected_kl = parse_num(f[5], 6);
        r.summary.predictive_variance = parse_num(f[6], 7);
        r.summary.entropy = parse_num(f[7], 8);
        r.summary.energy_mean = parse_num(f[8], 9);
        r.summary.energy_variance = parse_num(f[9], 10);
        r.summary.combined = parse_num(f[10], 11);
        r.summary.mean_probs.clear();
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_epoch_log_csv(const std::string& path, const std::vector<EpochStats>& log) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "epoch,lr,cls_loss,uncert_loss,total_loss,train_acc\n";
    for (const auto& e : log) {
        out << e.epoch << "," << format_double(e.lr) << "," << format_double(e.cls_loss) << ","
            << format_double(e.uncert_loss) << "," << format_double(e.total_loss) << ","
            << format_double(e.train_accuracy) << "\n";
    }
}

MapRun run_map(const RunConfig& config, const Checkpoint& ckpt) {
    if (ckpt.model.input_dim() != 2) {
        throw InconsistentShape("map: model input dimension is " +
                                std::to_string(ckpt.model.input_dim()) + ", maps need 2");
    }
    const auto resolution = static_cast<std::size_t>(config.get_int("map.resolution"));
    if (resolution < 1) {
        throw ConfigError("key 'map.resolution': must be >= 1");
    }
    const double lo = config.get_double("map.lo");
    const double hi = config.get_double("map.hi");
    const bool stochastic = config.get_bool("eval.stochastic");
    const auto passes = static_cast<std::size_t>(config.get_int("eval.passes"));
    const double w_mi = config.get_double("eval.w_mi");
    const double w_energy = config.get_double("eval.w_energy");
    const RngStream eval_rng(static_cast<std::uint64_t>(config.get_int("eval.seed")),
                             kEvalStream);

    std::vector<McSummary> summaries(resolution * resolution);
    const auto coord = [&](std::size_t i) {
        return resolution == 1 ? 0.5 * (lo + hi)
                               : lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(resolution - 1);
    };
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const double xy[2] = {coord(ix), coord(iy)};
            const std::size_t idx = iy * resolution + ix;
            const McSamples samples =
                stochastic
                    ? mc_infer(ckpt.model, xy, passes, eval_rng.derive(0x67726964, idx))
                    : deterministic_samples(ckpt.model, xy);
            summaries[idx] = summarize(samples);
            if (ckpt.vos && ckpt.vos->gaussians_ready()) {
                const ForwardTrace trace = forward(ckpt.model, xy, nullptr);
                summaries[idx].epistemic =
                    vos_epistemic_score(summaries[idx], trace.penultimate(), *ckpt.vos);
            }
        }
    }
    const std::vector<double> combined = combined_scores(summaries, w_mi, w_energy);

    MapRun maps;
    for (GridMap* m : {&maps.aleatoric, &maps.epistemic, &maps.combined}) {
        m->resolution = resolution;
        m->lo = lo;
        m->hi = hi;
        m->values.resize(resolution * resolution);
    }
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        maps.aleatoric.values[i] = summaries[i].mutual_information;
        maps.epistemic.values[i] = -epistemic_score(summaries[i]);
        maps.combined.values[i] = (w_mi + w_energy) - combined[i];
    }
    return maps;
}

void write_map_csv(const std::string& path, const GridMap& map) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "x,y,value\n";
    const auto coord = [&](std::size_t i) {
        return map.resolution == 1
                   ? 0.5 * (map.lo + map.hi)
                   : map.lo + (map.hi - map.lo) * static_cast<double>(i) /
                         static_cast<double>(map.resolution - 1);
    };
    for (std::size_t iy = 0; iy < map.resolution; ++iy) {
        for (std::size_t ix = 0; ix < map.resolution; ++ix) {
            out << format_double(coord(ix)) << "," << format_double(coord(iy)) << ","
                << format_double(map.values[iy * map.resolution + ix]) << "\n";
        }
    }
}

}  // namespace uq
