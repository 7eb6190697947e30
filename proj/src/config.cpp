#include "becs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "becs/error.hpp"

namespace becs {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double to_real(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty() || !std::isfinite(v))
        throw ConfigError("config " + key + ": '" + value + "' is not a number");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!value.empty() && value[0] != '-') v = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) throw ConfigError("config " + key + ": '" + value + "' is not a non-negative integer");
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
    KeyValueConfig kv;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(where + "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
        if (key.empty()) throw ConfigError(where + "empty key");
        kv.values_[section + "." + key] = trim(std::string_view(line).substr(eq + 1));
    }
    return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void KeyValueConfig::apply_environment(char** envp) {
    constexpr std::string_view prefix = "BECS_";
    for (char** e = envp; e && *e; ++e) {
        const std::string_view entry(*e);
        if (entry.rfind(prefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string name = lower(std::string(entry.substr(prefix.size(), eq - prefix.size())));
        const auto underscore = name.find('_');
        if (underscore == std::string::npos || underscore == 0 || underscore + 1 == name.size())
            throw ConfigError("environment override " + std::string(entry.substr(0, eq)) +
                              " must look like BECS_<SECTION>_<KEY>");
        values_[name.substr(0, underscore) + "." + name.substr(underscore + 1)] = std::string(entry.substr(eq + 1));
    }
}

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    hp.seed = s;
    split.seed = s;
    poison.seed = s;
}

RunConfig RunConfig::from(const KeyValueConfig& kv, const std::filesystem::path& base_dir,
                          const std::filesystem::path& default_data_dir) {
    RunConfig cfg;
    std::set<std::string> consumed;

    const auto value = [&](const std::string& key) -> std::optional<std::string> {
        consumed.insert(key);
        return kv.get(key);
    };
    const auto real = [&](const std::string& key, double& out) {
        if (auto v = value(key)) out = to_real(key, *v);
    };
    const auto count = [&](const std::string& key, auto& out) {
        if (auto v = value(key)) out = static_cast<std::remove_reference_t<decltype(out)>>(to_unsigned(key, *v));
    };
    const auto path = [&](const std::string& key, std::filesystem::path& out) {
        if (auto v = value(key)) {
            std::filesystem::path p(*v);
            out = p.is_absolute() ? p : base_dir / p;
        }
    };

    if (auto v = value("run.preset")) {
        if (*v != "paper-table-vi") throw ConfigError("unknown preset '" + *v + "'");
        cfg.preset = *v;
    }
    std::uint64_t seed = cfg.seed;
    count("run.seed", seed);

    cfg.data_dir = default_data_dir;
    path("paths.data", cfg.data_dir);
    cfg.lexicons = cfg.data_dir / "lexicons";
    cfg.homoglyphs = cfg.data_dir / "homoglyphs.tsv";
    cfg.templates = cfg.data_dir / "templates";
    path("paths.lexicons", cfg.lexicons);
    path("paths.homoglyphs", cfg.homoglyphs);
    path("paths.templates", cfg.templates);
    path("paths.model", cfg.model);
    path("paths.corpus", cfg.corpus);

    real("thresholds.tau_low", cfg.thresholds.tau_low);
    real("thresholds.tau_high", cfg.thresholds.tau_high);
    real("costs.v_transaction", cfg.costs.v_transaction);
    real("costs.c_inv", cfg.costs.c_inv);
    real("costs.c_rev", cfg.costs.c_rev);
    count("policy.min_words", cfg.min_words);
    real("psi.alpha", cfg.psi.alpha);
    real("psi.beta", cfg.psi.beta);

    std::uint64_t iterations = static_cast<std::uint64_t>(cfg.hp.iterations);
    std::uint64_t depth = static_cast<std::uint64_t>(cfg.hp.depth);
    count("model.iterations", iterations);
    count("model.depth", depth);
    if (iterations > 100000 || depth > 30) throw ConfigError("model.iterations or model.depth is implausibly large");
    cfg.hp.iterations = static_cast<int>(iterations);
    cfg.hp.depth = static_cast<int>(depth);
    real("model.learning_rate", cfg.hp.learning_rate);
    real("model.l2_leaf_reg", cfg.hp.l2_leaf_reg);
    real("model.subsample", cfg.hp.subsample);

    real("split.train_fraction", cfg.split.train_fraction);
    real("poison.substitution_probability", cfg.poison.substitution_probability);
    real("poison.zwsp_insertion_probability", cfg.poison.zwsp_insertion_probability);
    real("poison.corpus_poison_rate", cfg.poison.corpus_poison_rate);
    if (auto v = value("poison.preset")) {
        if (*v != "full-map" && *v != "cyrillic-a") throw ConfigError("poison.preset must be full-map or cyrillic-a");
        cfg.poison_preset = *v;
    }

    real("evaluate.threshold", cfg.eval_threshold);
    count("evaluate.reliability_bins", cfg.reliability_bins);
    std::uint64_t repeats = static_cast<std::uint64_t>(cfg.importance_repeats);
    count("evaluate.importance_repeats", repeats);
    cfg.importance_repeats = static_cast<int>(std::min<std::uint64_t>(repeats, 1000));
    count("evaluate.folds", cfg.folds);
    real("optimize.grid_step", cfg.grid_step);
    count("bench.warmup", cfg.bench_warmup);

    for (const auto& [key, v] : kv.values())
        if (!consumed.count(key)) throw ConfigError("unknown config key '" + key + "'");

    cfg.set_seed(seed);
    cfg.thresholds.validate();
    cfg.costs.validate();
    cfg.hp.validate();
    cfg.poison.validate();
    if (!(cfg.psi.alpha > 0.0 && cfg.psi.beta > 0.0)) throw ConfigError("psi.alpha and psi.beta must be > 0");
    if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0))
        throw ConfigError("split.train_fraction must be in (0, 1)");
    if (!(cfg.eval_threshold >= 0.0 && cfg.eval_threshold <= 1.0)) throw ConfigError("evaluate.threshold must be in [0, 1]");
    if (cfg.reliability_bins == 0) throw ConfigError("evaluate.reliability_bins must be >= 1");
    if (cfg.importance_repeats < 1) throw ConfigError("evaluate.importance_repeats must be >= 1");
    if (cfg.folds < 2) throw ConfigError("evaluate.folds must be >= 2");
    if (!(cfg.grid_step > 0.0 && cfg.grid_step <= 0.5)) throw ConfigError("optimize.grid_step must be in (0, 0.5]");
    return cfg;
}

}  // namespace becs
