#include "becs/model.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "becs/error.hpp"
#include "becs/random.hpp"

namespace becs {

namespace {

constexpr std::string_view kMagic = "becs-gbdt-model";
constexpr int kFormatVersion = 1;
constexpr double kMinHessian = 1e-16;
constexpr double kMinGain = 1e-15;
constexpr double kTieTolerance = 1e-12;
constexpr double kProbFloor = 0x1p-53;
constexpr double kProbCeil = 1.0 - 0x1p-53;

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double row_loss(double margin, int label) { return softplus(margin) - (label == 1 ? margin : 0.0); }

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
};

double split_score(double g, double h, double lambda) { return g * g / (h + lambda); }

// Grows one tree level by level. For every level each feature's presorted
// row order is scanned once, accumulating left-hand gradient sums per open
// node; a candidate threshold sits midway between consecutive distinct
// values within a node.
class TreeGrower {
public:
    TreeGrower(const std::vector<std::vector<double>>& columns, const std::vector<std::vector<std::uint32_t>>& order,
               const std::vector<double>& grad, const std::vector<double>& hess, const Hyperparameters& hp)
        : columns_(columns), order_(order), grad_(grad), hess_(hess), hp_(hp) {}

    Tree grow(const std::vector<char>& in_sample) {
        const std::size_t n = grad_.size();
        std::vector<TreeNode> nodes(1);
        std::vector<NodeStats> stats(1);
        std::vector<int> node_of(n, -1);
        for (std::size_t r = 0; r < n; ++r) {
            if (!in_sample[r]) continue;
            node_of[r] = 0;
            stats[0].g += grad_[r];
            stats[0].h += hess_[r];
            ++stats[0].count;
        }

        std::vector<int> frontier{0};
        for (int level = 0; level < hp_.depth && !frontier.empty(); ++level) {
            std::vector<int> open;
            for (int id : frontier)
                if (stats[id].count >= 2) open.push_back(id);
            if (open.empty()) break;

            const auto best = find_splits(open, nodes.size(), stats, node_of);

            std::vector<int> next;
            for (std::size_t s = 0; s < open.size(); ++s) {
                if (best[s].feature < 0) continue;
                const int id = open[s];
                const int left = static_cast<int>(nodes.size());
                nodes.push_back({});
                nodes.push_back({});
                stats.push_back({});
                stats.push_back({});
                nodes[id].feature = best[s].feature;
                nodes[id].threshold = best[s].threshold;
                nodes[id].left = left;
                nodes[id].right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            if (next.empty()) break;

            for (std::size_t r = 0; r < n; ++r) {
                const int id = node_of[r];
                if (id < 0 || nodes[id].is_leaf()) continue;
                const TreeNode& node = nodes[id];
                const int child = columns_[node.feature][r] <= node.threshold ? node.left : node.right;
                node_of[r] = child;
                stats[child].g += grad_[r];
                stats[child].h += hess_[r];
                ++stats[child].count;
            }
            frontier = std::move(next);
        }

        for (std::size_t id = 0; id < nodes.size(); ++id) {
            if (!nodes[id].is_leaf()) continue;
            nodes[id].value = -stats[id].g / (stats[id].h + hp_.l2_leaf_reg) * hp_.learning_rate;
        }
        return Tree{std::move(nodes)};
    }

private:
    std::vector<SplitCandidate> find_splits(const std::vector<int>& open, std::size_t node_total,
                                            const std::vector<NodeStats>& stats, const std::vector<int>& node_of) const {
        const double lambda = hp_.l2_leaf_reg;
        std::vector<int> slot(node_total, -1);
        for (std::size_t s = 0; s < open.size(); ++s) slot[open[s]] = static_cast<int>(s);

        std::vector<SplitCandidate> best(open.size());
        std::vector<double> parent_score(open.size());
        for (std::size_t s = 0; s < open.size(); ++s)
            parent_score[s] = split_score(stats[open[s]].g, stats[open[s]].h, lambda);

        std::vector<double> gl(open.size()), hl(open.size()), last(open.size());
        std::vector<char> seen(open.size());
        for (std::size_t f = 0; f < columns_.size(); ++f) {
            std::fill(gl.begin(), gl.end(), 0.0);
            std::fill(hl.begin(), hl.end(), 0.0);
            std::fill(seen.begin(), seen.end(), 0);
            const auto& column = columns_[f];
            for (std::uint32_t r : order_[f]) {
                const int id = node_of[r];
                if (id < 0) continue;
                const int s = slot[id];
                if (s < 0) continue;
                const double v = column[r];
                if (seen[s] && v > last[s]) {
                    const NodeStats& parent = stats[id];
                    const double gain = 0.5 * (split_score(gl[s], hl[s], lambda) +
                                               split_score(parent.g - gl[s], parent.h - hl[s], lambda) -
                                               parent_score[s]);
                    // Identical partitions reached through different summation
                    // orders differ in the last bits; keep the earlier one.
                    if (gain > kMinGain && gain > best[s].gain * (1.0 + kTieTolerance)) {
                        double threshold = last[s] + (v - last[s]) / 2;
                        if (!(threshold < v)) threshold = last[s];
                        best[s] = {gain, static_cast<int>(f), threshold};
                    }
                }
                gl[s] += grad_[r];
                hl[s] += hess_[r];
                last[s] = v;
                seen[s] = 1;
            }
        }
        return best;
    }

    const std::vector<std::vector<double>>& columns_;
    const std::vector<std::vector<std::uint32_t>>& order_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    const Hyperparameters& hp_;
};

void validate_tree(const Tree& tree, std::size_t index, int max_depth) {
    const auto fail = [&](const std::string& what) {
        throw ModelError("tree " + std::to_string(index) + ": " + what);
    };
    if (tree.nodes.empty()) fail("no nodes");
    const int count = static_cast<int>(tree.nodes.size());
    std::vector<int> parents(tree.nodes.size(), 0);
    for (int id = 0; id < count; ++id) {
        const TreeNode& node = tree.nodes[id];
        if (node.is_leaf()) {
            if (node.feature != -1) fail("bad leaf marker");
            if (!std::isfinite(node.value)) fail("non-finite leaf value");
            continue;
        }
        if (node.feature >= static_cast<int>(kFeatureCount))
            fail("node " + std::to_string(id) + " uses feature index " + std::to_string(node.feature));
        if (std::isnan(node.threshold)) fail("NaN threshold");
        // Children always come after their parent, which rules out cycles.
        for (int child : {node.left, node.right}) {
            if (child <= id || child >= count) fail("node " + std::to_string(id) + " has invalid child reference");
            ++parents[child];
        }
    }
    for (int id = 1; id < count; ++id)
        if (parents[id] != 1) fail("node " + std::to_string(id) + " is not referenced exactly once");
    if (tree.depth() > max_depth) fail("depth " + std::to_string(tree.depth()) + " exceeds " + std::to_string(max_depth));
}

}  // namespace

void Hyperparameters::validate() const {
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (depth < 1) throw ConfigError("depth must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (!(l2_leaf_reg >= 0.0) || !std::isfinite(l2_leaf_reg)) throw ConfigError("l2_leaf_reg must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must be in (0, 1]");
}

double Tree::evaluate(const FeatureVector& fv) const {
    std::size_t id = 0;
    while (!nodes[id].is_leaf()) {
        const TreeNode& node = nodes[id];
        id = static_cast<std::size_t>(fv.values[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                         : node.right);
    }
    return nodes[id].value;
}

int Tree::depth() const {
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        deepest = std::max(deepest, level[id]);
        if (nodes[id].is_leaf()) continue;
        level[static_cast<std::size_t>(nodes[id].left)] = level[id] + 1;
        level[static_cast<std::size_t>(nodes[id].right)] = level[id] + 1;
    }
    return deepest;
}

TreeEnsembleModel::TreeEnsembleModel(Hyperparameters hp, double base_score, std::vector<Tree> trees,
                                     std::uint64_t schema_hash)
    : hp_(hp), base_score_(base_score), trees_(std::move(trees)), schema_hash_(schema_hash) {
    if (!std::isfinite(base_score_)) throw ModelError("base_score is not finite");
    for (std::size_t i = 0; i < trees_.size(); ++i) validate_tree(trees_[i], i, hp_.depth);
}

double TreeEnsembleModel::margin(const FeatureVector& fv) const {
    double z = base_score_;
    for (const auto& tree : trees_) z += tree.evaluate(fv);
    return z;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_proba(const TreeEnsembleModel& model, const FeatureVector& fv) {
    if (fv.schema_hash != model.schema_hash()) throw ModelError("feature vector schema does not match model schema");
    return std::clamp(sigmoid(model.margin(fv)), kProbFloor, kProbCeil);
}

double logistic_loss(const TreeEnsembleModel& model, std::span<const LabeledVector> data) {
    double total = 0.0;
    for (const auto& row : data) total += row_loss(model.margin(row.features), row.label);
    return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

TreeEnsembleModel train(std::span<const LabeledVector> data, const Hyperparameters& hp, TrainingLog* log) {
    hp.validate();
    if (data.empty()) throw DataError("training data is empty");
    const std::size_t n = data.size();
    std::size_t positives = 0;
    for (const auto& row : data) {
        if (row.label != 0 && row.label != 1) throw DataError("labels must be 0 or 1");
        if (row.features.schema_hash != feature_schema_hash()) throw DataError("training vector has foreign schema");
        positives += static_cast<std::size_t>(row.label);
    }
    if (positives == 0 || positives == n) throw DataError("training data contains a single class");

    std::vector<std::vector<double>> columns(kFeatureCount, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t f = 0; f < kFeatureCount; ++f) columns[f][r] = data[r].features.values[f];
    std::vector<std::vector<std::uint32_t>> order(kFeatureCount, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::iota(order[f].begin(), order[f].end(), 0u);
        const auto& col = columns[f];
        std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }

    const double prevalence = static_cast<double>(positives) / static_cast<double>(n);
    const double base_score = std::log(prevalence / (1.0 - prevalence));
    std::vector<double> margin(n, base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<char> in_sample(n, 1);
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    const std::size_t sample_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hp.subsample * static_cast<double>(n))));
    Rng rng(hp.seed);

    const auto mean_loss = [&] {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) total += row_loss(margin[r], data[r].label);
        return total / static_cast<double>(n);
    };
    if (log) {
        log->initial_loss = mean_loss();
        log->loss.clear();
        log->loss.reserve(static_cast<std::size_t>(hp.iterations));
    }

    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(hp.iterations));
    TreeGrower grower(columns, order, grad, hess, hp);
    for (int it = 0; it < hp.iterations; ++it) {
        for (std::size_t r = 0; r < n; ++r) {
            const double p = sigmoid(margin[r]);
            grad[r] = p - data[r].label;
            hess[r] = std::max(p * (1.0 - p), kMinHessian);
        }
        if (sample_size < n) {
            // Partial Fisher-Yates: the first sample_size entries of rows.
            for (std::size_t i = 0; i < sample_size; ++i) std::swap(rows[i], rows[i + rng.below(n - i)]);
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (std::size_t i = 0; i < sample_size; ++i) in_sample[rows[i]] = 1;
        }
        Tree tree = grower.grow(in_sample);
        for (std::size_t r = 0; r < n; ++r) margin[r] += tree.evaluate(data[r].features);
        trees.push_back(std::move(tree));
        if (log) log->loss.push_back(mean_loss());
    }
    return TreeEnsembleModel(hp, base_score, std::move(trees));
}

std::string serialize_model(const TreeEnsembleModel& model) {
    const auto& hp = model.hyperparameters();
    std::ostringstream out;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, model.schema_hash());
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "schema_hash " << hash << '\n';
    out << "features " << kFeatureCount << '\n';
    out << "iterations " << hp.iterations << '\n';
    out << "depth " << hp.depth << '\n';
    out << "learning_rate " << hex(hp.learning_rate) << '\n';
    out << "l2_leaf_reg " << hex(hp.l2_leaf_reg) << '\n';
    out << "subsample " << hex(hp.subsample) << '\n';
    out << "seed " << hp.seed << '\n';
    out << "base_score " << hex(model.base_score()) << '\n';
    out << "trees " << model.trees().size() << '\n';
    for (std::size_t t = 0; t < model.trees().size(); ++t) {
        const auto& nodes = model.trees()[t].nodes;
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const auto& node : nodes) {
            if (node.is_leaf()) {
                out << "leaf " << hex(node.value) << '\n';
            } else {
                out << "split " << node.feature << ' ' << hex(node.threshold) << ' ' << node.left << ' ' << node.right
                    << '\n';
            }
        }
    }
    out << "end\n";
    return out.str();
}

namespace {

class LineReader {
public:
    LineReader(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

    std::vector<std::string> next() {
        if (pos_ >= text_.size()) fail("unexpected end of file");
        const std::size_t eol = std::min(text_.find('\n', pos_), text_.size());
        std::istringstream line{std::string(text_.substr(pos_, eol - pos_))};
        pos_ = eol + 1;
        ++line_;
        std::vector<std::string> fields;
        for (std::string f; line >> f;) fields.push_back(f);
        return fields;
    }

    std::vector<std::string> expect(std::string_view key, std::size_t arity) {
        auto fields = next();
        if (fields.size() != arity + 1 || fields[0] != key) fail("expected '" + std::string(key) + "'");
        return fields;
    }

    bool at_end() const { return pos_ >= text_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        throw ModelError(std::string(origin_) + ":" + std::to_string(line_) + ": " + what);
    }

    double real(const std::string& s) const {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') fail("bad number '" + s + "'");
        return v;
    }

    long long integer(const std::string& s) const {
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (s.empty() || *end != '\0') fail("bad integer '" + s + "'");
        return v;
    }

    std::uint64_t unsigned_integer(const std::string& s, int base = 10) const {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, base);
        if (s.empty() || s[0] == '-' || *end != '\0') fail("bad unsigned integer '" + s + "'");
        return v;
    }

private:
    std::string_view text_;
    std::string_view origin_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

}  // namespace

TreeEnsembleModel parse_model(std::string_view text, std::string_view origin) {
    LineReader in(text, origin);
    const auto header = in.expect(kMagic, 1);
    if (in.integer(header[1]) != kFormatVersion) in.fail("unsupported format version " + header[1]);
    const std::uint64_t schema_hash = in.unsigned_integer(in.expect("schema_hash", 1)[1], 16);
    if (in.integer(in.expect("features", 1)[1]) != static_cast<long long>(kFeatureCount))
        in.fail("feature count does not match");

    Hyperparameters hp;
    hp.iterations = static_cast<int>(in.integer(in.expect("iterations", 1)[1]));
    hp.depth = static_cast<int>(in.integer(in.expect("depth", 1)[1]));
    hp.learning_rate = in.real(in.expect("learning_rate", 1)[1]);
    hp.l2_leaf_reg = in.real(in.expect("l2_leaf_reg", 1)[1]);
    hp.subsample = in.real(in.expect("subsample", 1)[1]);
    hp.seed = in.unsigned_integer(in.expect("seed", 1)[1]);
    try {
        hp.validate();
    } catch (const ConfigError& e) {
        in.fail(e.what());
    }
    const double base_score = in.real(in.expect("base_score", 1)[1]);
    const long long tree_count = in.integer(in.expect("trees", 1)[1]);
    if (tree_count < 0) in.fail("negative tree count");

    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(tree_count));
    for (long long t = 0; t < tree_count; ++t) {
        const auto head = in.expect("tree", 2);
        if (in.integer(head[1]) != t) in.fail("tree index out of sequence");
        const long long node_count = in.integer(head[2]);
        if (node_count < 1 || node_count > (1LL << 20)) in.fail("bad node count");
        Tree tree;
        tree.nodes.reserve(static_cast<std::size_t>(node_count));
        for (long long k = 0; k < node_count; ++k) {
            const auto fields = in.next();
            TreeNode node;
            if (fields.size() == 2 && fields[0] == "leaf") {
                node.value = in.real(fields[1]);
            } else if (fields.size() == 5 && fields[0] == "split") {
                const long long feature = in.integer(fields[1]);
                if (feature < 0 || feature >= static_cast<long long>(kFeatureCount))
                    in.fail("feature index " + fields[1] + " out of range");
                node.feature = static_cast<int>(feature);
                node.threshold = in.real(fields[2]);
                node.left = static_cast<int>(in.integer(fields[3]));
                node.right = static_cast<int>(in.integer(fields[4]));
            } else {
                in.fail("expected 'leaf' or 'split' node");
            }
            tree.nodes.push_back(node);
        }
        trees.push_back(std::move(tree));
    }
    in.expect("end", 0);
    return TreeEnsembleModel(hp, base_score, std::move(trees), schema_hash);
}

void save_model(const TreeEnsembleModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError("cannot write model file " + path.string());
    out << serialize_model(model);
    if (!out) throw ModelError("failed writing model file " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto model = parse_model(buf.str(), path.string());
    const bool matches = model.schema_matches();
    return LoadedModel{std::move(model), matches};
}

std::vector<FeatureImportance> permutation_importance(const TreeEnsembleModel& model,
                                                      std::span<const LabeledVector> data, std::uint64_t seed,
                                                      int repeats) {
    if (data.empty()) throw DataError("permutation importance needs data");
    if (repeats < 1) throw ConfigError("permutation importance needs at least one repeat");

    const auto accuracy = [&](const std::vector<FeatureVector>& rows) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int predicted = predict_proba(model, rows[i]) > 0.5 ? 1 : 0;
            correct += predicted == data[i].label;
        }
        return static_cast<double>(correct) / static_cast<double>(rows.size());
    };

    std::vector<FeatureVector> rows;
    rows.reserve(data.size());
    for (const auto& row : data) rows.push_back(row.features);
    const double baseline = accuracy(rows);

    std::vector<FeatureImportance> out;
    std::vector<double> column(data.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        for (std::size_t i = 0; i < data.size(); ++i) column[i] = data[i].features.values[f];
        double total = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            Rng rng(mix_seed(seed, f * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(rep)));
            std::vector<double> shuffled = column;
            rng.shuffle(shuffled);
            for (std::size_t i = 0; i < data.size(); ++i) rows[i].values[f] = shuffled[i];
            total += accuracy(rows);
        }
        for (std::size_t i = 0; i < data.size(); ++i) rows[i].values[f] = column[i];
        const auto feature = static_cast<Feature>(f);
        out.push_back({feature, std::string(feature_name(feature)), baseline - total / repeats});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
    return out;
}

}  // namespace becs
