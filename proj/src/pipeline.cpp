#include "becs/pipeline.hpp"

#include "becs/error.hpp"

namespace becs {

FeaturePipeline::FeaturePipeline(std::shared_ptr<const HomoglyphMap> map, std::shared_ptr<const LexiconSet> lexicons,
                                 PsiParams psi, bool normalize)
    : map_(std::move(map)), lexicons_(std::move(lexicons)), psi_(psi), normalize_(normalize) {
    if (!map_ || !lexicons_) throw ConfigError("feature pipeline needs a homoglyph map and lexicons");
}

NormalizedText FeaturePipeline::prepare(const EmailRecord& email) const {
    std::string text;
    text.reserve(email.subject.size() + email.body.size() + 1);
    if (!email.subject.empty()) {
        text = email.subject;
        text.push_back('\n');
    }
    text += email.body;
    return normalize_ ? normalize(text, *map_) : passthrough(text);
}

FeatureVector FeaturePipeline::features(const EmailRecord& email) const {
    return extract_features(prepare(email), *lexicons_, psi_);
}

std::vector<LabeledVector> FeaturePipeline::labeled(const Corpus& corpus) const {
    std::vector<LabeledVector> out;
    out.reserve(corpus.size());
    for (const auto& r : corpus) {
        if (!r.label) throw DataError("record '" + r.id + "' has no label");
        out.push_back({features(r), *r.label});
    }
    return out;
}

FeaturePipeline FeaturePipeline::without_normalization() const {
    FeaturePipeline copy = *this;
    copy.normalize_ = false;
    return copy;
}

Scanner::Scanner(FeaturePipeline pipeline, std::shared_ptr<const TreeEnsembleModel> model, Thresholds thresholds,
                 PolicyConfig policy)
    : pipeline_(std::move(pipeline)), model_(std::move(model)), thresholds_(thresholds), policy_(std::move(policy)) {
    if (!model_) throw ModelError("scanner needs a model");
    if (!model_->schema_matches()) throw ModelError("model was trained on a different feature schema");
    thresholds_.validate();
}

double Scanner::score(const EmailRecord& email) const { return predict_proba(*model_, pipeline_.features(email)); }

ScanResult Scanner::scan(const EmailRecord& email) const {
    const double p = score(email);
    return {email.id, p, decide(email, p, thresholds_, policy_)};
}

}  // namespace becs
