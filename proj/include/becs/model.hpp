#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "becs/features.hpp"

namespace becs {

// Defaults are the tuned forensic-stream settings (545 trees of depth 8).
struct Hyperparameters {
    int iterations = 545;
    int depth = 8;
    double learning_rate = 0.0780;
    double l2_leaf_reg = 1.29;
    double subsample = 1.0;
    std::uint64_t seed = 42;

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;  // leaf contribution in log-odds, learning rate included
    int left = -1;       // taken when x[feature] <= threshold
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double evaluate(const FeatureVector& fv) const;
    int depth() const;
};

struct LabeledVector {
    FeatureVector features;
    int label = 0;
};

class TreeEnsembleModel {
public:
    // Validates structure; throws ModelError on a bad node reference,
    // feature index, or a tree deeper than hp.depth.
    TreeEnsembleModel(Hyperparameters hp, double base_score, std::vector<Tree> trees,
                      std::uint64_t schema_hash = feature_schema_hash());

    const Hyperparameters& hyperparameters() const { return hp_; }
    double base_score() const { return base_score_; }
    const std::vector<Tree>& trees() const { return trees_; }
    std::uint64_t schema_hash() const { return schema_hash_; }
    bool schema_matches() const { return schema_hash_ == feature_schema_hash(); }

    // base_score plus every tree's leaf contribution.
    double margin(const FeatureVector& fv) const;

private:
    Hyperparameters hp_;
    double base_score_;
    std::vector<Tree> trees_;
    std::uint64_t schema_hash_;
};

double sigmoid(double z);

// Probability in the open interval (0, 1). Throws ModelError when fv was
// built against a different feature schema than the model.
double predict_proba(const TreeEnsembleModel& model, const FeatureVector& fv);

// Mean logistic loss over the full training set, before any tree
// (initial_loss) and after each boosting iteration.
struct TrainingLog {
    double initial_loss = 0.0;
    std::vector<double> loss;
};

// Newton-step gradient boosting on logistic loss with exact greedy splits.
// Throws DataError for empty or single-class data.
TreeEnsembleModel train(std::span<const LabeledVector> data, const Hyperparameters& hp, TrainingLog* log = nullptr);

double logistic_loss(const TreeEnsembleModel& model, std::span<const LabeledVector> data);

// Versioned text format; doubles are written as hex floats so a round trip
// is bit-exact.
std::string serialize_model(const TreeEnsembleModel& model);
TreeEnsembleModel parse_model(std::string_view text, std::string_view origin = "<memory>");
void save_model(const TreeEnsembleModel& model, const std::filesystem::path& path);

struct LoadedModel {
    TreeEnsembleModel model;
    // False when the file was written for a different feature schema;
    // predict_proba will refuse such a model.
    bool schema_matches;
};
LoadedModel load_model(const std::filesystem::path& path);

struct FeatureImportance {
    Feature feature;
    std::string name;
    double importance;
};

// Mean decrease in accuracy (positive iff p > 0.5) when one feature column is
// shuffled, averaged over `repeats` shuffles. Sorted by importance
// descending, ties by feature index.
std::vector<FeatureImportance> permutation_importance(const TreeEnsembleModel& model,
                                                      std::span<const LabeledVector> data, std::uint64_t seed,
                                                      int repeats = 5);

}  // namespace becs
