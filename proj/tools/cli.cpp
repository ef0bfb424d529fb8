#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "bargrain/checkpoint.hpp"
#include "bargrain/errors.hpp"
#include "bargrain/inspect.hpp"
#include "bargrain/preprocess.hpp"
#include "bargrain/train.hpp"

namespace fs = std::filesystem;

namespace bargrain::cli {

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path.string());
    out << content;
    if (!out) throw LoadError("failed writing " + path.string());
}

fs::path sibling(const fs::path& checkpoint, const std::string& suffix) {
    fs::path p = checkpoint;
    p.replace_extension();
    p += suffix;
    return p;
}

struct TrainArgs {
    std::string data, config, out, mode, log, metrics;
    std::optional<std::uint64_t> seed;
};

struct EvalArgs {
    std::string model, data, out;
};

struct AblateArgs {
    std::string data, config, out;
    std::optional<std::uint64_t> seed;
};

struct SynthArgs {
    std::string out;
    std::size_t subjects = 80, rois = 16, steps = 64;
    std::uint64_t seed = 3;
};

struct InspectArgs {
    std::string model, data, subject, out = ".";
    double top_percent = 2.0;
};

TrainConfig resolve_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                           const std::string& mode) {
    TrainConfig config = load_train_config(path);
    if (seed) config.seed = *seed;
    if (!mode.empty()) config.mode = parse_mode(mode);
    return config;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const TrainConfig config = resolve_config(a.config, a.seed, a.mode);
    const Dataset dataset = load_dataset(a.data);
    const TrainResult result = train_model(dataset, config);

    const fs::path ckpt = a.out;
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    save_checkpoint(result.model, ckpt);
    const fs::path log = a.log.empty() ? sibling(ckpt, ".log.csv") : fs::path(a.log);
    const fs::path metrics = a.metrics.empty() ? sibling(ckpt, ".metrics.json") : fs::path(a.metrics);
    write_file(log, training_log_csv(result.log));
    write_file(metrics, metrics_to_json(result.test));

    out << "trained " << to_string(config.mode) << " model on " << result.split.train.size() << " subjects ("
        << result.log.size() << " epochs, best " << result.best_epoch << ")\n"
        << "checkpoint: " << ckpt.string() << "\nlog: " << log.string() << "\nmetrics: " << metrics.string() << "\n"
        << metrics_to_json(result.test);
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const Dataset dataset = load_dataset(a.data);
    const ModelState state = load_checkpoint(a.model, dataset.n_rois(), dataset.t_steps());
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::string json = metrics_to_json(evaluate(state, dataset, all));
    if (!a.out.empty()) write_file(a.out, json);
    out << json;
    return kExitOk;
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
    const TrainConfig config = resolve_config(a.config, a.seed, "");
    const Dataset dataset = load_dataset(a.data);
    const std::string table = ablation_csv(run_ablation(dataset, config));
    write_file(a.out, table);
    out << table;
    return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const Dataset dataset = generate_synthetic(a.subjects, a.rois, a.steps, a.seed);
    save_dataset(dataset, a.out);
    out << "wrote " << dataset.size() << " subjects (" << a.rois << " ROIs x " << a.steps << " steps) to " << a.out
        << "\n";
    return kExitOk;
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
    const Dataset dataset = load_dataset(a.data);
    const ModelState state = load_checkpoint(a.model, dataset.n_rois(), dataset.t_steps());
    const auto it = std::find_if(dataset.subjects.begin(), dataset.subjects.end(),
                                 [&](const BoldMatrix& s) { return s.subject_id == a.subject; });
    if (it == dataset.subjects.end()) throw ValidationError("unknown subject '" + a.subject + "'");

    const InspectionReport report = inspect_subject(state, *it, a.top_percent);
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_file(dir / "edges_filtered.csv", edges_csv(report.filtered.edges));
    write_file(dir / "edges_optimal.csv", edges_csv(report.optimal.edges));
    write_file(dir / "degrees.csv", degrees_csv(report));
    out << "subject " << a.subject << ": filtered " << report.filtered.present_edges << " edges (kept "
        << report.filtered.edges.size() << "), optimal " << report.optimal.present_edges << " edges (kept "
        << report.optimal.edges.size() << ")\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual-graph brain network classifier"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, log and test metrics");
    train_cmd->add_option("--data", train.data, "Dataset directory")->required();
    train_cmd->add_option("--config", train.config, "Training config JSON")->required();
    train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
    train_cmd->add_option("--seed", train.seed, "Override the config seed");
    train_cmd->add_option("--mode", train.mode, "full|no-corr|no-optim|no-gconv");
    train_cmd->add_option("--log", train.log, "Training log CSV (default <out>.log.csv)");
    train_cmd->add_option("--metrics", train.metrics, "Metrics JSON (default <out>.metrics.json)");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on every subject of a dataset");
    eval_cmd->add_option("--model", eval.model, "Checkpoint path")->required();
    eval_cmd->add_option("--data", eval.data, "Dataset directory")->required();
    eval_cmd->add_option("--out", eval.out, "Metrics JSON path");

    AblateArgs ablate;
    auto* ablate_cmd = app.add_subcommand("ablate", "Train every ablation mode and write a comparison table");
    ablate_cmd->add_option("--data", ablate.data, "Dataset directory")->required();
    ablate_cmd->add_option("--config", ablate.config, "Training config JSON")->required();
    ablate_cmd->add_option("--out", ablate.out, "Table CSV path")->required();
    ablate_cmd->add_option("--seed", ablate.seed, "Override the config seed");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic two-block dataset");
    synth_cmd->add_option("--out", synth.out, "Output dataset directory")->required();
    synth_cmd->add_option("--subjects", synth.subjects, "Number of subjects (even, >= 4)");
    synth_cmd->add_option("--rois", synth.rois, "ROIs per subject (>= 8)");
    synth_cmd->add_option("--steps", synth.steps, "Time steps per ROI (>= 32)");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");

    InspectArgs inspect;
    auto* inspect_cmd = app.add_subcommand("inspect", "Export both graphs of one subject");
    inspect_cmd->add_option("--model", inspect.model, "Checkpoint path")->required();
    inspect_cmd->add_option("--data", inspect.data, "Dataset directory")->required();
    inspect_cmd->add_option("--subject", inspect.subject, "Subject id")->required();
    inspect_cmd->add_option("--top-percent", inspect.top_percent, "Share of edges to export, in percent");
    inspect_cmd->add_option("--out", inspect.out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train, out);
        if (eval_cmd->parsed()) return cmd_eval(eval, out);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate, out);
        if (synth_cmd->parsed()) return cmd_synth(synth, out);
        if (inspect_cmd->parsed()) return cmd_inspect(inspect, out);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace bargrain::cli
