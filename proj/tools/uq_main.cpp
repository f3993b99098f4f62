// Command-line surface: train toy models, evaluate ID/OOD populations
// (from a checkpoint or an external logit dump), render uncertainty maps
// and compare scored runs.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data/shape error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uq/error.hpp"
#include "uq/pipeline.hpp"
#include "pgm.hpp"

namespace {

namespace fs = std::filesystem;

struct ConfigFlags {
    std::string preset;
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir = "uq_out";
    long long seed = -1;
    long long epochs = -1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags, bool with_train_flags) {
    cmd->add_option("--preset", flags.preset,
                    "Config preset: toy-baseline, toy-vos, toy-ln-vos, toy-mc10-ln-vos");
    cmd->add_option("--config", flags.config_file, "key = value config file");
    cmd->add_option("--set", flags.sets, "Override a single key, e.g. --set train.lr=0.05");
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--seed", flags.seed, "Shorthand for --set seed=N");
    if (with_train_flags) {
        cmd->add_option("--epochs", flags.epochs, "Shorthand for --set train.epochs=N");
    }
}

uq::RunConfig resolve_config(const ConfigFlags& flags) {
    uq::RunConfig config;
    if (!flags.preset.empty()) config.apply_preset(flags.preset);
    if (!flags.config_file.empty()) config.load_file(flags.config_file);
    for (const std::string& kv : flags.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw uq::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (flags.seed >= 0) config.set("seed", std::to_string(flags.seed));
    if (flags.epochs >= 0) config.set("train.epochs", std::to_string(flags.epochs));
    return config;
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

int cmd_train(const ConfigFlags& flags) {
    const uq::RunConfig config = resolve_config(flags);
    const uq::TrainRun run = uq::run_train(config);
    const fs::path out = prepare_out_dir(flags.out_dir);
    uq::save_checkpoint((out / "checkpoint.bin").string(), run.checkpoint);
    uq::write_epoch_log_csv((out / "train_log.csv").string(), run.log);
    config.save_resolved((out / "config.resolved").string());
    std::cout << "wrote " << (out / "checkpoint.bin").string() << " ("
              << run.log.size() << " epochs)\n";
    return 0;
}

void write_eval_outputs(const fs::path& out, const uq::EvalRun& run) {
    uq::write_scored_csv((out / "scored.csv").string(), run.rows);
    uq::write_report_csv((out / "report.csv").string(), run.reports);
    const std::string text = uq::render_report_text(run.reports);
    {
        std::ofstream f(out / "report.txt");
        f << text;
        if (run.has_mi_ratios) {
            f << "MI ratio misclassified/correct ID  "
              << uq::format_double(run.mi_ratios.ratio_ft) << "\n"
              << "MI ratio OOD/ID                    "
              << uq::format_double(run.mi_ratios.ratio_oodid) << "\n";
        }
    }
    if (!run.reports.empty()) {
        uq::write_histogram_csv((out / "histogram.csv").string(), run.reports[0].histogram);
    }
    std::cout << text;
}

int cmd_eval(const ConfigFlags& flags, const std::string& checkpoint_path,
             const std::string& dump_path) {
    const uq::RunConfig config = resolve_config(flags);
    if (checkpoint_path.empty() == dump_path.empty()) {
        throw uq::ConfigError("eval needs exactly one of --checkpoint or --dump");
    }
    const fs::path out = prepare_out_dir(flags.out_dir);
    uq::EvalRun run;
    if (!dump_path.empty()) {
        uq::CsvContent content = uq::load_csv(dump_path);
        if (!std::holds_alternative<uq::LogitDump>(content)) {
            throw uq::SchemaError("'" + dump_path + "' holds features, expected a logit dump");
        }
        run = uq::run_eval_dump(config, std::get<uq::LogitDump>(content));
    } else {
        const uq::Checkpoint ckpt = uq::load_checkpoint(checkpoint_path);
        run = uq::run_eval(config, ckpt);
    }
    write_eval_outputs(out, run);
    config.save_resolved((out / "config.resolved").string());
    return 0;
}

int cmd_map(const ConfigFlags& flags, const std::string& checkpoint_path) {
    const uq::RunConfig config = resolve_config(flags);
    const uq::Checkpoint ckpt = uq::load_checkpoint(checkpoint_path);
    const uq::MapRun maps = uq::run_map(config, ckpt);
    const fs::path out = prepare_out_dir(flags.out_dir);
    const struct {
        const char* name;
        const uq::GridMap* map;
    } entries[] = {{"map_aleatoric", &maps.aleatoric},
                   {"map_epistemic", &maps.epistemic},
                   {"map_combined", &maps.combined}};
    for (const auto& e : entries) {
        uq::write_map_csv((out / (std::string(e.name) + ".csv")).string(), *e.map);
        uq::write_pgm((out / (std::string(e.name) + ".pgm")).string(), *e.map);
    }
    config.save_resolved((out / "config.resolved").string());
    std::cout << "wrote 3 maps at resolution " << maps.aleatoric.resolution << " to "
              << out.string() << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& scored_files, const std::string& out_dir) {
    // Label rows by file stem; fall back to the full path when stems clash
    // (several runs all named scored.csv).
    std::map<std::string, int> stem_counts;
    for (const std::string& file : scored_files) {
        ++stem_counts[fs::path(file).stem().string()];
    }
    const auto row_label = [&](const std::string& file) {
        const std::string stem = fs::path(file).stem().string();
        return stem_counts[stem] > 1 ? file : stem;
    };

    std::ostringstream csv;
    csv << "model,id_acc,fpr95_id,fpr95_ood,auroc,aupr_id,aupr_ood,mi_ratio_ft,"
           "mi_ratio_oodid\n";
    for (const std::string& file : scored_files) {
        const std::vector<uq::ScoredRow> rows = uq::load_scored_csv(file);
        uq::ScoredPopulations pops;
        double correct = 0.0, total = 0.0;
        std::vector<double> mi_correct, mi_incorrect, mi_ood;
        for (const auto& r : rows) {
            if (r.domain == uq::Domain::id) {
                pops.id_scores.push_back(r.summary.combined);
                if (r.label >= 0) {
                    total += 1.0;
                    const bool ok = r.pred == r.label;
                    if (ok) correct += 1.0;
                    (ok ? mi_correct : mi_incorrect).push_back(r.summary.mutual_information);
                }
            } else {
                pops.ood_scores.push_back(r.summary.combined);
                mi_ood.push_back(r.summary.mutual_information);
            }
        }
        double ratio_ft = std::numeric_limits<double>::quiet_NaN();
        double ratio_oodid = std::numeric_limits<double>::quiet_NaN();
        try {
            const uq::MiRatios ratios = uq::mi_ratio_report(mi_correct, mi_incorrect, mi_ood);
            ratio_ft = ratios.ratio_ft;
            ratio_oodid = ratios.ratio_oodid;
        } catch (const uq::EmptyGroup&) {
        }
        csv << row_label(file) << ","
            << uq::format_double(total > 0.0 ? correct / total : 0.0) << ","
            << uq::format_double(uq::fpr_at_tpr(pops, uq::Positive::id)) << ","
            << uq::format_double(uq::fpr_at_tpr(pops, uq::Positive::ood)) << ","
            << uq::format_double(uq::auroc(pops)) << ","
            << uq::format_double(uq::aupr(pops, uq::Positive::id)) << ","
            << uq::format_double(uq::aupr(pops, uq::Positive::ood)) << ","
            << uq::format_double(ratio_ft) << "," << uq::format_double(ratio_oodid) << "\n";
    }
    std::cout << csv.str();
    if (!out_dir.empty()) {
        const fs::path out = prepare_out_dir(out_dir);
        std::ofstream f(out / "comparison.csv");
        f << csv.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint aleatoric (MC-Dropout) and epistemic (energy-score) uncertainty "
                 "estimation for classifiers"};
    app.require_subcommand(1);

    ConfigFlags train_flags, eval_flags, map_flags;
    std::string eval_checkpoint, eval_dump, map_checkpoint;
    std::vector<std::string> report_files;
    std::string report_out;

    CLI::App* train = app.add_subcommand("train", "Train a model and write a checkpoint");
    add_config_flags(train, train_flags, true);

    CLI::App* eval = app.add_subcommand("eval", "Score ID/OOD data and write metric reports");
    add_config_flags(eval, eval_flags, false);
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint produced by train");
    eval->add_option("--dump", eval_dump, "External logit dump CSV instead of a checkpoint");

    CLI::App* map = app.add_subcommand("map", "Render uncertainty grid maps for planar models");
    add_config_flags(map, map_flags, false);
    map->add_option("--checkpoint", map_checkpoint, "Checkpoint produced by train")->required();

    CLI::App* report = app.add_subcommand("report", "Side-by-side comparison of scored runs");
    report->add_option("files", report_files, "scored.csv files")->required();
    report->add_option("--out", report_out, "Directory for comparison.csv");

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(train_flags);
        if (eval->parsed()) return cmd_eval(eval_flags, eval_checkpoint, eval_dump);
        if (map->parsed()) return cmd_map(map_flags, map_checkpoint);
        if (report->parsed()) return cmd_report(report_files, report_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const uq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const uq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
