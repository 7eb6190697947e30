#include "becs/adversary.hpp"

#include <algorithm>
#include <cmath>

#include "becs/error.hpp"
#include "becs/random.hpp"
#include "becs/utf8.hpp"

namespace becs {

namespace {
constexpr char32_t kZeroWidthSpace = 0x200B;
}

void PoisonConfig::validate() const {
    for (double p : {substitution_probability, zwsp_insertion_probability, corpus_poison_rate})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("poison probabilities must be in [0, 1]");
}

ReverseMap ReverseMap::invert(const HomoglyphMap& map) {
    ReverseMap reverse;
    for (const auto& [source, replacement] : map.entries()) {
        if (replacement.size() != 1) continue;
        reverse.table_[replacement.front()].push_back(source);
    }
    const auto invisibles = map.invisibles();
    if (map.is_invisible(kZeroWidthSpace)) {
        reverse.zero_width_ = kZeroWidthSpace;
    } else if (!invisibles.empty()) {
        reverse.zero_width_ = invisibles.front();
    }
    return reverse;
}

ReverseMap ReverseMap::cyrillic_a_only() {
    ReverseMap reverse;
    reverse.table_[U'a'] = {0x0430};
    reverse.zero_width_ = kZeroWidthSpace;
    return reverse;
}

std::string poison_text(std::string_view text, const PoisonConfig& cfg, const ReverseMap& reverse,
                        std::uint64_t seed) {
    Rng rng(seed);
    const auto zw = reverse.zero_width();
    std::string out;
    out.reserve(text.size() + text.size() / 4);
    bool at_word_start = true;
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_space(cp)) {
            at_word_start = true;
            utf8::append(out, cp);
            continue;
        }
        if (at_word_start && zw && rng.bernoulli(cfg.zwsp_insertion_probability)) utf8::append(out, *zw);
        at_word_start = false;
        const auto* options = reverse.confusables(cp);
        if (options && rng.bernoulli(cfg.substitution_probability)) {
            utf8::append(out, (*options)[options->size() == 1 ? 0 : rng.below(options->size())]);
        } else {
            utf8::append(out, cp);
        }
    }
    return out;
}

namespace {

EmailRecord poison_record(const EmailRecord& r, const PoisonConfig& cfg, const ReverseMap& reverse,
                          std::uint64_t stream) {
    EmailRecord out = r;
    out.subject = poison_text(r.subject, cfg, reverse, mix_seed(cfg.seed, 2 * stream));
    out.body = poison_text(r.body, cfg, reverse, mix_seed(cfg.seed, 2 * stream + 1));
    out.poisoned = true;
    return out;
}

}  // namespace

Corpus poison_corpus(const Corpus& corpus, const PoisonConfig& cfg, const ReverseMap& reverse) {
    cfg.validate();
    std::vector<std::size_t> frauds;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (corpus[i].label == kFraud) frauds.push_back(i);

    const auto target =
        static_cast<std::size_t>(std::floor(cfg.corpus_poison_rate * static_cast<double>(frauds.size()) + 1e-9));
    Rng rng(mix_seed(cfg.seed, 0xC0FFEE));
    rng.shuffle(frauds);
    frauds.resize(target);
    std::sort(frauds.begin(), frauds.end());

    Corpus out = corpus;
    for (std::size_t i : frauds) out[i] = poison_record(corpus[i], cfg, reverse, i);
    return out;
}

Corpus poison_all(const Corpus& corpus, const PoisonConfig& cfg, const ReverseMap& reverse) {
    cfg.validate();
    Corpus out;
    out.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) out.push_back(poison_record(corpus[i], cfg, reverse, i));
    return out;
}

RobustnessReport robustness_report(const EmailScorer& scorer, const Corpus& clean_frauds,
                                   const Corpus& poisoned_frauds, double threshold) {
    if (clean_frauds.empty() || poisoned_frauds.empty()) throw DataError("robustness report needs non-empty sets");
    const auto recall = [&](const Corpus& set) {
        std::size_t hit = 0;
        for (const auto& r : set) hit += scorer(r) > threshold;
        return static_cast<double>(hit) / static_cast<double>(set.size());
    };
    RobustnessReport report;
    report.clean_recall = recall(clean_frauds);
    report.poisoned_recall = recall(poisoned_frauds);
    report.drop = report.clean_recall - report.poisoned_recall;
    return report;
}

}  // namespace becs
