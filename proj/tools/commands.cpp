#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "becs/adversary.hpp"
#include "becs/error.hpp"
#include "becs/evaluation.hpp"
#include "becs/pipeline.hpp"

namespace becs::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string exact(double v) { return num(v, "%.17g"); }

void log(const Context& ctx, const std::string& line) {
    if (ctx.log_stream) *ctx.log_stream << line << '\n';
}

// First non-empty path wins.
fs::path pick(const fs::path& flag, const fs::path& configured, const char* what) {
    const fs::path p = flag.empty() ? configured : flag;
    if (p.empty()) throw ConfigError(std::string("no ") + what + " given (flag or config)");
    return p;
}

fs::path corpus_path(const fs::path& flag, const RunConfig& cfg) {
    const fs::path p = pick(flag, cfg.corpus, "corpus");
    if (!fs::exists(p)) throw DataError("corpus file not found: " + p.string());
    return p;
}

std::shared_ptr<const TreeEnsembleModel> load_checked_model(const fs::path& flag, const RunConfig& cfg) {
    const fs::path p = pick(flag, cfg.model, "model");
    if (!fs::exists(p)) throw ModelError("model file not found: " + p.string());
    LoadedModel loaded = load_model(p);
    if (!loaded.schema_matches)
        throw ModelError("model " + p.string() + " was trained on a different feature schema");
    return std::make_shared<const TreeEnsembleModel>(std::move(loaded.model));
}

struct Resources {
    std::shared_ptr<const HomoglyphMap> map;
    std::shared_ptr<const LexiconSet> lexicons;
};

Resources load_resources(const RunConfig& cfg) {
    if (!fs::exists(cfg.homoglyphs)) throw DataError("homoglyph map not found: " + cfg.homoglyphs.string());
    if (!fs::is_directory(cfg.lexicons)) throw DataError("lexicon directory not found: " + cfg.lexicons.string());
    return {std::make_shared<const HomoglyphMap>(HomoglyphMap::load(cfg.homoglyphs)),
            std::make_shared<const LexiconSet>(LexiconSet::load(cfg.lexicons))};
}

Scanner make_scanner(const RunConfig& cfg, const Resources& res, std::shared_ptr<const TreeEnsembleModel> model) {
    return Scanner(FeaturePipeline(res.map, res.lexicons, cfg.psi), std::move(model), cfg.thresholds,
                   make_policy(*res.lexicons, res.map, cfg.min_words));
}

ReverseMap reverse_map(const RunConfig& cfg, const HomoglyphMap& map) {
    return cfg.poison_preset == "cyrillic-a" ? ReverseMap::cyrillic_a_only() : ReverseMap::invert(map);
}

class Report {
public:
    Report(const Context& ctx, const std::string& name) : path_(ctx.out_dir / name), ctx_(ctx) {
        fs::create_directories(ctx.out_dir);
        out_.open(path_, std::ios::binary);
        if (!out_) throw DataError("cannot write " + path_.string());
    }
    ~Report() {
        out_.close();
        log(ctx_, "wrote " + path_.string());
    }
    std::ofstream& operator*() { return out_; }
    template <typename T>
    std::ofstream& operator<<(const T& v) {
        out_ << v;
        return out_;
    }

private:
    fs::path path_;
    const Context& ctx_;
    std::ofstream out_;
};

void save(const Context& ctx, const Corpus& corpus, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    save_corpus(corpus, ctx.out_dir / name);
    log(ctx, "wrote " + (ctx.out_dir / name).string() + " (" + std::to_string(corpus.size()) + " records)");
}

std::vector<int> labels_of(const Corpus& corpus) {
    std::vector<int> y;
    y.reserve(corpus.size());
    for (const auto& r : corpus) {
        if (!r.label) throw DataError("record '" + r.id + "' has no label");
        y.push_back(*r.label);
    }
    return y;
}

std::vector<double> score_all(const Scanner& scanner, const Corpus& corpus) {
    std::vector<double> s;
    s.reserve(corpus.size());
    for (const auto& r : corpus) s.push_back(scanner.score(r));
    return s;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    return cols;
}

double parse_score(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || !(v >= 0.0 && v <= 1.0))
        throw DataError(where + "score '" + text + "' is not a probability");
    return v;
}

// Rows of a delimited score file, skipping the header line.
std::vector<std::vector<std::string>> read_score_rows(const fs::path& path, std::size_t min_cols) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open score file " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line_no == 1) continue;
        auto cols = split_tabs(line);
        if (cols.size() < min_cols)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(min_cols) +
                            " tab-separated columns");
        rows.push_back(std::move(cols));
    }
    return rows;
}

}  // namespace

void cmd_synth(const Context& ctx, const SynthArgs& args) {
    const auto& cfg = ctx.cfg;
    if (args.per_class == 0) throw ConfigError("--per-class must be >= 1");
    const TemplateSet templates = TemplateSet::load(cfg.templates);
    Corpus corpus = synthesize(templates, args.per_class, cfg.seed);
    if (args.poison) {
        const auto map = HomoglyphMap::load(cfg.homoglyphs);
        corpus = poison_corpus(corpus, cfg.poison, reverse_map(cfg, map));
    }
    save(ctx, corpus, "corpus.jsonl");
}

void cmd_train(const Context& ctx, const TrainArgs& args) {
    const auto& cfg = ctx.cfg;
    const Corpus corpus = ingest(corpus_path(args.corpus, cfg));
    const Resources res = load_resources(cfg);

    Corpus train_set;
    if (args.no_split) {
        train_set = corpus;
    } else {
        Split split = stratified_split(corpus, cfg.split);
        save(ctx, split.train, "train.jsonl");
        save(ctx, split.test, "test.jsonl");
        train_set = std::move(split.train);
    }

    const FeaturePipeline pipeline(res.map, res.lexicons, cfg.psi);
    const auto data = pipeline.labeled(train_set);
    TrainingLog training_log;
    const TreeEnsembleModel model = train(data, cfg.hp, &training_log);

    fs::create_directories(ctx.out_dir);
    save_model(model, ctx.out_dir / "model.becs");
    log(ctx, "wrote " + (ctx.out_dir / "model.becs").string());

    Report tsv(ctx, "train_log.tsv");
    tsv << "iteration\tlogistic_loss\n";
    tsv << "0\t" << exact(training_log.initial_loss) << '\n';
    for (std::size_t i = 0; i < training_log.loss.size(); ++i)
        tsv << (i + 1) << '\t' << exact(training_log.loss[i]) << '\n';
}

void cmd_evaluate(const Context& ctx, const EvaluateArgs& args) {
    const auto& cfg = ctx.cfg;
    auto model = load_checked_model(args.model, cfg);
    const Corpus corpus = ingest(corpus_path(args.corpus, cfg));
    if (corpus.empty()) throw DataError("evaluation corpus is empty");
    const Resources res = load_resources(cfg);
    const Scanner scanner = make_scanner(cfg, res, model);

    const std::vector<int> y = labels_of(corpus);
    const std::vector<double> s = score_all(scanner, corpus);
    const double th = cfg.eval_threshold;
    const ConfusionMatrix cm = confusion(s, y, th);

    // Paired comparison partner: a score file, or this model without normalization.
    std::vector<double> other;
    std::string other_name;
    if (!args.baseline_scores.empty()) {
        std::map<std::string, double> by_id;
        for (const auto& row : read_score_rows(args.baseline_scores, 2))
            by_id[row[0]] = parse_score(row.back(), args.baseline_scores.string() + ": ");
        for (const auto& r : corpus) {
            const auto it = by_id.find(r.id);
            if (it == by_id.end()) throw DataError("baseline scores have no entry for '" + r.id + "'");
            other.push_back(it->second);
        }
        other_name = args.baseline_scores.filename().string();
    } else {
        const FeaturePipeline raw = scanner.pipeline().without_normalization();
        for (const auto& r : corpus) other.push_back(predict_proba(*model, raw.features(r)));
        other_name = "same-model-without-normalization";
    }
    const DisagreementCounts dis = disagreement(s, other, y, th);

    {
        Report rep(ctx, "evaluation.txt");
        rep << "# becs evaluation\n";
        rep << "records\t" << corpus.size() << '\n';
        rep << "fraud\t" << count_label(corpus, kFraud) << '\n';
        rep << "legitimate\t" << count_label(corpus, kLegitimate) << '\n';
        rep << "threshold\t" << num(th) << '\n';
        rep << "tp\t" << cm.tp << "\nfp\t" << cm.fp << "\ntn\t" << cm.tn << "\nfn\t" << cm.fn << '\n';
        rep << "precision\t" << num(precision(cm)) << '\n';
        rep << "recall\t" << num(recall(cm)) << '\n';
        rep << "f1\t" << num(f1(cm)) << '\n';
        rep << "accuracy\t" << num(accuracy(cm)) << '\n';
        const bool both = cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0;
        rep << "auc\t" << (both ? num(auc(s, y)) : "n/a") << '\n';
        rep << "brier\t" << num(brier(s, y)) << '\n';
        rep << "comparison\t" << other_name << '\n';
        rep << "model_only_errors\t" << dis.a_only_errors << '\n';
        rep << "comparison_only_errors\t" << dis.b_only_errors << '\n';
        rep << "both_correct\t" << dis.both_correct << '\n';
        rep << "both_wrong\t" << dis.both_wrong << '\n';
        const std::size_t discordant = dis.a_only_errors + dis.b_only_errors;
        rep << "mcnemar_chi2\t" << (discordant ? num(mcnemar(dis.a_only_errors, dis.b_only_errors)) : "n/a") << '\n';
        std::string corr = "n/a";
        try {
            corr = num(score_correlation(s, other));
        } catch (const DataError&) {
        }
        rep << "score_correlation\t" << corr << '\n';
    }
    {
        const auto bins = reliability_bins(s, y, cfg.reliability_bins);
        Report rep(ctx, "reliability.tsv");
        rep << "bin_lower\tbin_upper\tcount\tmean_score\tfraud_rate\n";
        for (const auto& b : bins)
            rep << num(b.lower, "%.4f") << '\t' << num(b.upper, "%.4f") << '\t' << b.count << '\t' << num(b.mean_score)
                << '\t' << num(b.empirical_rate) << '\n';
    }
    {
        Report rep(ctx, "scores.tsv");
        rep << "id\tlabel\tscore\n";
        for (std::size_t i = 0; i < corpus.size(); ++i) rep << corpus[i].id << '\t' << y[i] << '\t' << exact(s[i]) << '\n';
    }

    if (!args.skip_importance || !args.curve_sizes.empty()) {
        const auto data = scanner.pipeline().labeled(corpus);
        if (!args.skip_importance) {
            const auto importance = permutation_importance(*model, data, cfg.seed, cfg.importance_repeats);
            Report rep(ctx, "importance.tsv");
            rep << "rank\tfeature\tmean_accuracy_drop\n";
            int rank = 1;
            for (const auto& fi : importance)
                rep << rank++ << '\t' << fi.name << '\t' << num(fi.importance) << '\n';
        }
        if (!args.curve_sizes.empty()) {
            const auto curve = learning_curve(data, args.curve_sizes, cfg.folds, cfg.hp, cfg.seed);
            Report rep(ctx, "learning_curve.tsv");
            rep << "train_size\ttrain_auc\ttrain_ci95\tvalidation_auc\tvalidation_ci95\n";
            for (const auto& p : curve)
                rep << p.train_size << '\t' << num(p.train_auc_mean) << '\t' << num(p.train_auc_ci) << '\t'
                    << num(p.validation_auc_mean) << '\t' << num(p.validation_auc_ci) << '\n';
        }
    }
}

void cmd_poison(const Context& ctx, const PoisonArgs& args) {
    const auto& cfg = ctx.cfg;
    const Corpus corpus = ingest(corpus_path(args.corpus, cfg));
    std::shared_ptr<const TreeEnsembleModel> model;
    if (!args.model.empty() || !cfg.model.empty()) model = load_checked_model(args.model, cfg);
    const Resources res = load_resources(cfg);
    const ReverseMap reverse = reverse_map(cfg, *res.map);

    save(ctx, poison_corpus(corpus, cfg.poison, reverse), "poisoned.jsonl");
    if (!model) return;

    Corpus clean;
    for (const auto& r : corpus)
        if (r.label == kFraud && r.poisoned != true) clean.push_back(r);
    if (clean.empty()) throw DataError("robustness report needs unpoisoned fraud records");
    const Corpus attacked = poison_all(clean, cfg.poison, reverse);

    const Scanner scanner = make_scanner(cfg, res, model);
    const FeaturePipeline raw = scanner.pipeline().without_normalization();
    const double th = cfg.eval_threshold;
    const RobustnessReport with = robustness_report([&](const EmailRecord& e) { return scanner.score(e); }, clean,
                                                    attacked, th);
    const RobustnessReport without = robustness_report(
        [&](const EmailRecord& e) { return predict_proba(*model, raw.features(e)); }, clean, attacked, th);

    Report rep(ctx, "robustness.txt");
    rep << "# recall on fraud records before and after poisoning; drop in percentage points\n";
    rep << "fraud_records\t" << clean.size() << '\n';
    rep << "threshold\t" << num(th) << '\n';
    rep << "preset\t" << cfg.poison_preset << '\n';
    rep << "normalizer\tclean_recall\tpoisoned_recall\tdrop_pp\n";
    rep << "enabled\t" << num(with.clean_recall) << '\t' << num(with.poisoned_recall) << '\t'
        << num(with.drop_points(), "%.2f") << '\n';
    rep << "disabled\t" << num(without.clean_recall) << '\t' << num(without.poisoned_recall) << '\t'
        << num(without.drop_points(), "%.2f") << '\n';
}

void cmd_optimize(const Context& ctx, const OptimizeArgs& args) {
    const auto& cfg = ctx.cfg;
    std::vector<double> s;
    std::vector<int> y;
    std::vector<std::optional<double>> values;

    if (!args.scores.empty()) {
        if (!fs::exists(args.scores)) throw DataError("score file not found: " + args.scores.string());
        for (const auto& row : read_score_rows(args.scores, 3)) {
            if (row[1] != "0" && row[1] != "1") throw DataError(args.scores.string() + ": label must be 0 or 1");
            y.push_back(row[1] == "1" ? kFraud : kLegitimate);
            s.push_back(parse_score(row[2], args.scores.string() + ": "));
        }
    } else {
        auto model = load_checked_model(args.model, cfg);
        const Corpus corpus = ingest(corpus_path(args.corpus, cfg));
        const Resources res = load_resources(cfg);
        const Scanner scanner = make_scanner(cfg, res, model);
        y = labels_of(corpus);
        s = score_all(scanner, corpus);
        bool any_value = false;
        for (const auto& r : corpus) {
            values.push_back(r.value);
            any_value = any_value || r.value.has_value();
        }
        if (!any_value) values.clear();
    }
    if (s.empty()) throw DataError("no scores to optimize over");

    const CostSurface surface = sweep_cost_surface(s, y, values, cfg.costs, cfg.grid_step);
    const auto [best, cost] = optimal_thresholds(surface);
    {
        Report rep(ctx, "cost_surface.tsv");
        write_surface(*rep, surface);
    }
    {
        const auto it = std::find_if(surface.points.begin(), surface.points.end(), [&](const SurfacePoint& p) {
            return p.tau_low == best.tau_low && p.tau_high == best.tau_high;
        });
        Report rep(ctx, "optimum.txt");
        rep << "# minimum expected loss over the threshold grid (safeguard excluded)\n";
        rep << "tau_low\t" << num(best.tau_low, "%.4f") << '\n';
        rep << "tau_high\t" << num(best.tau_high, "%.4f") << '\n';
        rep << "fn\t" << it->outcomes.fn << "\nfp\t" << it->outcomes.fp << "\ngrey\t" << it->outcomes.grey << '\n';
        rep << "total_usd\t" << num(cost, "%.2f") << '\n';
        rep << "v_transaction\t" << num(cfg.costs.v_transaction, "%.2f") << '\n';
        rep << "c_inv\t" << num(cfg.costs.c_inv, "%.2f") << '\n';
        rep << "c_rev\t" << num(cfg.costs.c_rev, "%.2f") << '\n';
    }
    if (std::count(y.begin(), y.end(), kFraud) > 0) {
        const auto roi = roi_sensitivity(s, y, cfg.costs, args.v_range, cfg.grid_step);
        Report rep(ctx, "roi.tsv");
        rep << "# roi = (baseline - defended) / baseline; baseline = fraud_count * v_transaction (no filter)\n";
        rep << "v_transaction\tbaseline_usd\tdefended_usd\ttau_low\ttau_high\troi\n";
        for (const auto& p : roi)
            rep << num(p.v_transaction, "%.2f") << '\t' << num(p.baseline_loss, "%.2f") << '\t'
                << num(p.defended_loss, "%.2f") << '\t' << num(p.thresholds.tau_low, "%.4f") << '\t'
                << num(p.thresholds.tau_high, "%.4f") << '\t' << num(p.roi) << '\n';
    }
}

void cmd_bench(const Context& ctx, const BenchArgs& args) {
    const auto& cfg = ctx.cfg;
    auto model = load_checked_model(args.model, cfg);
    Corpus corpus = ingest(corpus_path(args.corpus, cfg));
    if (args.limit > 0 && corpus.size() > args.limit) corpus.resize(args.limit);
    const Resources res = load_resources(cfg);
    const Scanner scanner = make_scanner(cfg, res, model);

    const LatencyStats stats = latency_bench(
        [&](const EmailRecord& e) { return scanner.scan(e).probability; }, corpus, cfg.bench_warmup);
    {
        Report rep(ctx, "latency.txt");
        rep << "# per-email latency of normalize, extract, score and decide; single thread\n";
        rep << "emails\t" << stats.n << '\n';
        rep << "warmup\t" << cfg.bench_warmup << '\n';
        rep << "mean_ms\t" << num(stats.mean_ms, "%.4f") << '\n';
        rep << "median_ms\t" << num(stats.median_ms, "%.4f") << '\n';
        rep << "p95_ms\t" << num(stats.p95_ms, "%.4f") << '\n';
        rep << "max_ms\t" << num(stats.max_ms, "%.4f") << '\n';
    }
    if (args.emit_raw_timings) {
        Report rep(ctx, "timings.tsv");
        rep << "id\tms\n";
        for (std::size_t i = 0; i < corpus.size(); ++i) rep << corpus[i].id << '\t' << num(stats.timings_ms[i], "%.6f") << '\n';
    }
}

void cmd_scan(const Context& ctx, const ScanArgs& args) {
    const auto& cfg = ctx.cfg;
    Corpus corpus;
    if (args.body || args.subject) {
        if (!args.corpus.empty()) throw ConfigError("give either --corpus or --subject/--body, not both");
        corpus.push_back({args.id, args.subject.value_or(""), args.body.value_or(""), std::nullopt, std::nullopt,
                          std::nullopt});
    } else {
        corpus = ingest(corpus_path(args.corpus, cfg));
    }
    auto model = load_checked_model(args.model, cfg);
    const Resources res = load_resources(cfg);
    const Scanner scanner = make_scanner(cfg, res, model);

    std::ostream& out = *ctx.stdout_stream;
    for (const auto& email : corpus) {
        const ScanResult r = scanner.scan(email);
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["probability"] = r.probability;
        j["verdict"] = to_string(r.decision.verdict);
        j["reason"] = to_string(r.decision.reason);
        out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
    out.flush();
}

}  // namespace becs::cli
