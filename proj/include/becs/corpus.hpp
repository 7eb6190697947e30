#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace becs {

inline constexpr int kLegitimate = 0;
inline constexpr int kFraud = 1;

struct EmailRecord {
    std::string id;
    std::string subject;
    std::string body;
    std::optional<int> label;     // kLegitimate / kFraud
    std::optional<double> value;  // transaction value at risk, USD
    std::optional<bool> poisoned;

    bool operator==(const EmailRecord&) const = default;
};

using Corpus = std::vector<EmailRecord>;

// Corpus file: a `# becs-corpus v1` header line followed by one JSON object
// per line with keys id, subject, body, and optionally label (0/1), value
// (USD >= 0) and poisoned (bool). Blank lines and further `#` lines are
// ignored. Errors carry the 1-based line number.
Corpus parse_corpus(std::string_view text, std::string_view origin = "<memory>");
Corpus ingest(const std::filesystem::path& path);

std::string corpus_line(const EmailRecord& record);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct SplitSpec {
    double train_fraction = 0.80;
    std::uint64_t seed = 42;
};

struct Split {
    Corpus train;
    Corpus test;
};

// Each class is shuffled with the seed and round(fraction * class size) of
// its records go to train. Both partitions keep the corpus's record order.
Split stratified_split(const Corpus& corpus, const SplitSpec& spec);

struct EmailTemplate {
    std::string category;  // pretext taxonomy or legitimate scenario
    std::string subject;
    std::string body;
    int label = kLegitimate;
};

// Slot-filled templates for the synthetic generator. Placeholders look like
// `{slot}`; slot values come from slots/<slot>.txt, except the generated
// slots amount, invoice_no and num4.
struct TemplateSet {
    std::vector<EmailTemplate> fraud;
    std::vector<EmailTemplate> legit;
    std::map<std::string, std::vector<std::string>> slots;

    // Reads fraud.tsv, legit.tsv (category<TAB>subject<TAB>body, `\n`
    // escapes in the body) and slots/*.txt. Throws DataError on an empty
    // class or a placeholder with no slot.
    static TemplateSet load(const std::filesystem::path& directory);
    void validate() const;
};

// n_per_class legitimate and n_per_class fraud emails, interleaved. Each
// record draws from its own seed derived from (seed, class, index).
Corpus synthesize(const TemplateSet& templates, std::size_t n_per_class, std::uint64_t seed);

std::size_t count_label(const Corpus& corpus, int label);

}  // namespace becs
