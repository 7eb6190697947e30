#pragma once

#include <memory>
#include <string>
#include <vector>

#include "becs/corpus.hpp"
#include "becs/decision.hpp"
#include "becs/features.hpp"
#include "becs/lexicon.hpp"
#include "becs/model.hpp"
#include "becs/normalizer.hpp"

namespace becs {

// Feature side of the forensic pipeline. Subject and body are joined with a
// newline and, unless normalization is switched off, run through the
// homoglyph map before extraction.
class FeaturePipeline {
public:
    FeaturePipeline(std::shared_ptr<const HomoglyphMap> map, std::shared_ptr<const LexiconSet> lexicons,
                    PsiParams psi = {}, bool normalize = true);

    NormalizedText prepare(const EmailRecord& email) const;
    FeatureVector features(const EmailRecord& email) const;

    // Every record must carry a label.
    std::vector<LabeledVector> labeled(const Corpus& corpus) const;

    FeaturePipeline without_normalization() const;

    const HomoglyphMap& homoglyphs() const { return *map_; }
    const LexiconSet& lexicons() const { return *lexicons_; }
    std::shared_ptr<const HomoglyphMap> homoglyphs_ptr() const { return map_; }

private:
    std::shared_ptr<const HomoglyphMap> map_;
    std::shared_ptr<const LexiconSet> lexicons_;
    PsiParams psi_;
    bool normalize_;
};

struct ScanResult {
    std::string id;
    double probability;
    Decision decision;
};

class Scanner {
public:
    // Throws ModelError when the model was trained on another feature schema.
    Scanner(FeaturePipeline pipeline, std::shared_ptr<const TreeEnsembleModel> model, Thresholds thresholds,
            PolicyConfig policy);

    double score(const EmailRecord& email) const;
    ScanResult scan(const EmailRecord& email) const;

    const FeaturePipeline& pipeline() const { return pipeline_; }

private:
    FeaturePipeline pipeline_;
    std::shared_ptr<const TreeEnsembleModel> model_;
    Thresholds thresholds_;
    PolicyConfig policy_;
};

}  // namespace becs
