#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "becs/config.hpp"

namespace becs::cli {

// Shared by every subcommand. Config is resolved before any command runs.
struct Context {
    RunConfig cfg;
    std::filesystem::path out_dir = ".";
    std::ostream* stdout_stream = nullptr;
    std::ostream* log_stream = nullptr;
};

struct SynthArgs {
    std::size_t per_class = 2000;
    bool poison = false;
};

struct TrainArgs {
    std::filesystem::path corpus;
    bool no_split = false;
};

struct EvaluateArgs {
    std::filesystem::path model;
    std::filesystem::path corpus;
    std::filesystem::path baseline_scores;  // id<TAB>score; empty = unnormalized pipeline
    std::vector<std::size_t> curve_sizes;
    bool skip_importance = false;
};

struct PoisonArgs {
    std::filesystem::path corpus;
    std::filesystem::path model;  // optional: adds the robustness report
};

struct OptimizeArgs {
    std::filesystem::path scores;  // id<TAB>label<TAB>score from evaluate
    std::filesystem::path model;
    std::filesystem::path corpus;
    std::vector<double> v_range = {1'000, 5'000, 10'000, 25'000, 50'000, 137'000, 250'000, 500'000};
};

struct BenchArgs {
    std::filesystem::path model;
    std::filesystem::path corpus;
    std::size_t limit = 0;  // 0 = all
    bool emit_raw_timings = false;
};

struct ScanArgs {
    std::filesystem::path model;
    std::filesystem::path corpus;
    std::optional<std::string> subject;
    std::optional<std::string> body;
    std::string id = "email";
};

void cmd_synth(const Context& ctx, const SynthArgs& args);
void cmd_train(const Context& ctx, const TrainArgs& args);
void cmd_evaluate(const Context& ctx, const EvaluateArgs& args);
void cmd_poison(const Context& ctx, const PoisonArgs& args);
void cmd_optimize(const Context& ctx, const OptimizeArgs& args);
void cmd_bench(const Context& ctx, const BenchArgs& args);
void cmd_scan(const Context& ctx, const ScanArgs& args);

}  // namespace becs::cli
