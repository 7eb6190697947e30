#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "becs/adversary.hpp"
#include "becs/corpus.hpp"
#include "becs/decision.hpp"
#include "becs/features.hpp"
#include "becs/model.hpp"

namespace becs {

// `[section]` headers and `key = value` lines; `#` and `;` start comments.
// Keys are stored as "section.key".
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, std::string_view origin = "<memory>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    std::optional<std::string> get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

    // BECS_<SECTION>_<KEY>=value overrides section.key, e.g.
    // BECS_COSTS_V_TRANSACTION=50000.
    void apply_environment(char** envp);

private:
    std::map<std::string, std::string> values_;
};

struct RunConfig {
    std::string preset = "paper-table-vi";

    std::filesystem::path data_dir;
    std::filesystem::path lexicons;
    std::filesystem::path homoglyphs;
    std::filesystem::path templates;
    std::filesystem::path model;
    std::filesystem::path corpus;

    Thresholds thresholds;
    CostModel costs;
    std::size_t min_words = 15;
    PsiParams psi;
    Hyperparameters hp;
    SplitSpec split;
    PoisonConfig poison;
    std::string poison_preset = "full-map";  // or "cyrillic-a"

    double eval_threshold = 0.12;
    std::size_t reliability_bins = 10;
    int importance_repeats = 5;
    std::size_t folds = 5;
    double grid_step = 0.01;
    std::size_t bench_warmup = 100;
    std::uint64_t seed = 42;

    // Paths without a value resolve against `default_data_dir`; relative paths
    // resolve against `base_dir`. Throws ConfigError for unknown keys,
    // unparsable values or violated invariants.
    static RunConfig from(const KeyValueConfig& kv, const std::filesystem::path& base_dir,
                          const std::filesystem::path& default_data_dir);

    void set_seed(std::uint64_t s);
};

}  // namespace becs
