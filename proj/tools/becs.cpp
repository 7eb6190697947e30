#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "becs/error.hpp"
#include "commands.hpp"

extern char** environ;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kModel = 4 };

#ifndef BECS_DEFAULT_DATA_DIR
#define BECS_DEFAULT_DATA_DIR "data"
#endif

}  // namespace

int main(int argc, char** argv) {
    using namespace becs;
    namespace fs = std::filesystem;

    CLI::App app{"becs: forensic triage of business email compromise"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "Key-value config file ([section] key = value)");
    app.add_option("--seed", seed, "Seed for every random draw (overrides run.seed)");
    app.add_option("--out", out_dir, "Directory for report files")->capture_default_str();

    cli::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus from templates");
    synth_cmd->add_option("--per-class", synth.per_class, "Emails per class")->capture_default_str();
    synth_cmd->add_flag("--poison", synth.poison, "Poison the configured fraction of fraud records");

    cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Split a corpus and train the tree ensemble");
    train_cmd->add_option("--corpus", train.corpus, "Labeled corpus (JSONL)");
    train_cmd->add_flag("--no-split", train.no_split, "Train on the whole corpus");

    cli::EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a labeled corpus and write metric reports");
    eval_cmd->add_option("--model", eval.model, "Model file");
    eval_cmd->add_option("--corpus", eval.corpus, "Labeled corpus (JSONL)");
    eval_cmd->add_option("--baseline-scores", eval.baseline_scores,
                         "id<TAB>...<TAB>score file for the paired comparison");
    eval_cmd->add_option("--learning-curve", eval.curve_sizes, "Training sizes for a k-fold learning curve")
        ->delimiter(',');
    eval_cmd->add_flag("--skip-importance", eval.skip_importance, "Do not compute permutation importance");

    cli::PoisonArgs poison;
    auto* poison_cmd = app.add_subcommand("poison", "Inject confusables into fraud records");
    poison_cmd->add_option("--corpus", poison.corpus, "Corpus (JSONL)");
    poison_cmd->add_option("--model", poison.model, "Model file; adds a robustness report");

    cli::OptimizeArgs optimize;
    auto* optimize_cmd = app.add_subcommand("optimize", "Sweep thresholds for minimum expected loss");
    optimize_cmd->add_option("--scores", optimize.scores, "scores.tsv written by evaluate");
    optimize_cmd->add_option("--model", optimize.model, "Model file (with --corpus)");
    optimize_cmd->add_option("--corpus", optimize.corpus, "Labeled corpus (with --model)");
    optimize_cmd->add_option("--v-range", optimize.v_range, "Transaction values for the ROI table")->delimiter(',');

    cli::BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure per-email pipeline latency");
    bench_cmd->add_option("--model", bench.model, "Model file");
    bench_cmd->add_option("--corpus", bench.corpus, "Corpus (JSONL)");
    bench_cmd->add_option("--limit", bench.limit, "Use the first N emails (0 = all)");
    bench_cmd->add_flag("--emit-raw-timings", bench.emit_raw_timings, "Also write timings.tsv");

    cli::ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Triage emails; one JSON line per email on stdout");
    scan_cmd->add_option("--model", scan.model, "Model file");
    scan_cmd->add_option("--corpus", scan.corpus, "Corpus (JSONL)");
    scan_cmd->add_option("--subject", scan.subject, "Subject of a single email");
    scan_cmd->add_option("--body", scan.body, "Body of a single email");
    scan_cmd->add_option("--id", scan.id, "Id reported for a single email")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        KeyValueConfig kv;
        fs::path base = fs::current_path();
        if (!config_path.empty()) {
            kv = KeyValueConfig::load(config_path);
            base = fs::absolute(config_path).parent_path();
        }
        kv.apply_environment(environ);

        cli::Context ctx;
        ctx.cfg = RunConfig::from(kv, base, BECS_DEFAULT_DATA_DIR);
        if (seed) ctx.cfg.set_seed(*seed);
        ctx.out_dir = out_dir;
        ctx.stdout_stream = &std::cout;
        ctx.log_stream = &std::cerr;

        if (*synth_cmd) cli::cmd_synth(ctx, synth);
        else if (*train_cmd) cli::cmd_train(ctx, train);
        else if (*eval_cmd) cli::cmd_evaluate(ctx, eval);
        else if (*poison_cmd) cli::cmd_poison(ctx, poison);
        else if (*optimize_cmd) cli::cmd_optimize(ctx, optimize);
        else if (*bench_cmd) cli::cmd_bench(ctx, bench);
        else if (*scan_cmd) cli::cmd_scan(ctx, scan);
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << '\n';
        return kModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
}
