#include "becs/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "becs/error.hpp"
#include "becs/random.hpp"

namespace becs {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kHeader = "# becs-corpus v1";
const std::set<std::string> kGeneratedSlots = {"amount", "invoice_no", "num4"};

std::string at(std::string_view origin, std::size_t line) {
    return std::string(origin) + ":" + std::to_string(line) + ": ";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = eol + 1;
    }
    return lines;
}

EmailRecord parse_record(const json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + "record is not a JSON object");
    const auto string_field = [&](const char* key, bool required) -> std::string {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw DataError(where + "missing field '" + key + "'");
            return {};
        }
        if (!it->is_string()) throw DataError(where + "field '" + key + "' must be a string");
        return it->get<std::string>();
    };

    EmailRecord r;
    r.id = string_field("id", true);
    if (r.id.empty()) throw DataError(where + "empty id");
    r.subject = string_field("subject", false);
    r.body = string_field("body", true);
    if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer() || (it->get<int>() != kLegitimate && it->get<int>() != kFraud))
            throw DataError(where + "label must be 0 or 1");
        r.label = it->get<int>();
    }
    if (const auto it = j.find("value"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) throw DataError(where + "value must be a number");
        const double v = it->get<double>();
        if (!(v >= 0.0) || !std::isfinite(v)) throw DataError(where + "value must be >= 0");
        r.value = v;
    }
    if (const auto it = j.find("poisoned"); it != j.end() && !it->is_null()) {
        if (!it->is_boolean()) throw DataError(where + "poisoned must be a boolean");
        r.poisoned = it->get<bool>();
    }
    return r;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char c = s[i + 1];
            if (c == 'n') {
                out.push_back('\n');
                ++i;
                continue;
            }
            if (c == 't') {
                out.push_back('\t');
                ++i;
                continue;
            }
            if (c == '\\') {
                out.push_back('\\');
                ++i;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::vector<EmailTemplate> read_templates(const std::filesystem::path& path, int label) {
    const std::string text = read_file(path);
    std::vector<EmailTemplate> out;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos)
            throw DataError(at(path.string(), line_no) + "expected category<TAB>subject<TAB>body");
        out.push_back({std::string(line.substr(0, t1)), unescape(line.substr(t1 + 1, t2 - t1 - 1)),
                       unescape(line.substr(t2 + 1)), label});
    }
    return out;
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        const std::size_t end = text.find('}', pos);
        if (end == std::string_view::npos) break;
        out.emplace_back(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

std::string with_commas(std::uint64_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    const std::size_t lead = digits.size() % 3;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i != 0 && (i - lead) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string generated_slot(const std::string& name, Rng& rng) {
    if (name == "amount") {
        // Log-uniform between $1,000 and $250,000, shown in a few house styles.
        const double v = std::exp(std::log(1000.0) + rng.uniform() * (std::log(250000.0) - std::log(1000.0)));
        const auto dollars = static_cast<std::uint64_t>(v);
        switch (rng.below(4)) {
            case 0:
                return "$" + with_commas(dollars);
            case 1:
                return "$" + with_commas(dollars) + "." + std::to_string(10 + rng.below(90));
            case 2:
                return with_commas(dollars) + " USD";
            default:
                return "USD " + with_commas(dollars);
        }
    }
    if (name == "invoice_no") return "INV-" + std::to_string(10000 + rng.below(90000));
    return std::to_string(1000 + rng.below(9000));  // num4
}

std::string fill(std::string_view text, const TemplateSet& set, Rng& rng) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find('{', pos);
        const std::size_t close = open == std::string_view::npos ? open : text.find('}', open);
        if (close == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        const std::string name(text.substr(open + 1, close - open - 1));
        if (kGeneratedSlots.count(name)) {
            out += generated_slot(name, rng);
        } else {
            const auto& values = set.slots.at(name);
            out += values[rng.below(values.size())];
        }
        pos = close + 1;
    }
    return out;
}

}  // namespace

Corpus parse_corpus(std::string_view text, std::string_view origin) {
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    bool seen_content = false;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        if (line.front() == '#') {
            if (!seen_content && line.rfind("# becs-corpus", 0) == 0 && line != kHeader)
                throw DataError(at(origin, line_no) + "unsupported corpus header '" + std::string(line) + "'");
            continue;
        }
        seen_content = true;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(at(origin, line_no) + "malformed JSON: " + e.what());
        }
        EmailRecord r = parse_record(j, at(origin, line_no));
        if (!ids.insert(r.id).second) throw DataError(at(origin, line_no) + "duplicate id '" + r.id + "'");
        corpus.push_back(std::move(r));
    }
    return corpus;
}

Corpus ingest(const std::filesystem::path& path) { return parse_corpus(read_file(path), path.string()); }

std::string corpus_line(const EmailRecord& r) {
    json j;
    j["id"] = r.id;
    j["subject"] = r.subject;
    j["body"] = r.body;
    if (r.label) j["label"] = *r.label;
    if (r.value) j["value"] = *r.value;
    if (r.poisoned) j["poisoned"] = *r.poisoned;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    out << kHeader << '\n';
    for (const auto& r : corpus) out << corpus_line(r) << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    write_corpus(out, corpus);
}

std::size_t count_label(const Corpus& corpus, int label) {
    return static_cast<std::size_t>(
        std::count_if(corpus.begin(), corpus.end(), [&](const EmailRecord& r) { return r.label == label; }));
}

Split stratified_split(const Corpus& corpus, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!corpus[i].label) throw DataError("record '" + corpus[i].id + "' is unlabeled");
        by_class[*corpus[i].label].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) throw DataError("stratified split needs both classes");

    std::vector<char> to_train(corpus.size(), 0);
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        const auto take = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < take; ++k) to_train[idx[k]] = 1;
    }
    Split split;
    for (std::size_t i = 0; i < corpus.size(); ++i) (to_train[i] ? split.train : split.test).push_back(corpus[i]);
    return split;
}

void TemplateSet::validate() const {
    if (fraud.empty() || legit.empty()) throw DataError("template set needs both fraud and legitimate templates");
    for (const auto& [name, values] : slots)
        if (values.empty()) throw DataError("slot '" + name + "' has no values");
    for (const auto* group : {&fraud, &legit}) {
        for (const auto& t : *group) {
            for (const auto* text : {&t.subject, &t.body}) {
                for (const auto& name : placeholders(*text)) {
                    if (!kGeneratedSlots.count(name) && !slots.count(name))
                        throw DataError("template '" + t.category + "' uses unknown slot '" + name + "'");
                }
            }
        }
    }
}

TemplateSet TemplateSet::load(const std::filesystem::path& directory) {
    TemplateSet set;
    set.fraud = read_templates(directory / "fraud.tsv", kFraud);
    set.legit = read_templates(directory / "legit.tsv", kLegitimate);
    const auto slot_dir = directory / "slots";
    if (std::filesystem::is_directory(slot_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(slot_dir)) {
            if (entry.path().extension() != ".txt") continue;
            const std::string text = read_file(entry.path());
            std::vector<std::string> values;
            for (std::string_view line : split_lines(text)) {
                if (line.empty() || line.front() == '#') continue;
                values.emplace_back(line);
            }
            set.slots[entry.path().stem().string()] = std::move(values);
        }
    }
    set.validate();
    return set;
}

Corpus synthesize(const TemplateSet& templates, std::size_t n_per_class, std::uint64_t seed) {
    templates.validate();
    Corpus corpus;
    corpus.reserve(2 * n_per_class);
    char id[32];
    for (std::size_t i = 0; i < n_per_class; ++i) {
        for (int label : {kLegitimate, kFraud}) {
            const auto& group = label == kFraud ? templates.fraud : templates.legit;
            Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(i) + static_cast<std::uint64_t>(label)));
            const EmailTemplate& t = group[rng.below(group.size())];
            std::snprintf(id, sizeof id, "syn-%s-%06zu", label == kFraud ? "fraud" : "legit", i + 1);
            EmailRecord r;
            r.id = id;
            r.subject = fill(t.subject, templates, rng);
            r.body = fill(t.body, templates, rng);
            r.label = label;
            corpus.push_back(std::move(r));
        }
    }
    return corpus;
}

}  // namespace becs
