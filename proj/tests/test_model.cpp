#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "becs/error.hpp"
#include "becs/model.hpp"
#include "stump_oracle.hpp"

using namespace becs;

namespace {

Hyperparameters stump_hp(double lr = 0.3, double l2 = 1.0) {
    Hyperparameters hp;
    hp.iterations = 1;
    hp.depth = 1;
    hp.learning_rate = lr;
    hp.l2_leaf_reg = l2;
    return hp;
}

// x[urgency_count] > 0 adds `lift` to the margin.
TreeEnsembleModel urgency_stump(double lift) {
    Tree t;
    t.nodes = {{static_cast<int>(Feature::urgency_count), 0.0, 0.0, 1, 2}, {}, {}};
    t.nodes[2].value = lift;
    Hyperparameters hp = stump_hp();
    return TreeEnsembleModel(hp, 0.0, {t});
}

std::vector<LabeledVector> separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledVector> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = data[i];
        r.label = static_cast<int>(i % 2);
        for (auto& v : r.features.values) v = rng.uniform();
        r.features[Feature::urgency_count] = r.label ? 1 + rng.below(5) : 0;
        r.features[Feature::caps_ratio] = r.label ? 0.6 + 0.4 * rng.uniform() : 0.5 * rng.uniform();
    }
    return data;
}

std::vector<LabeledVector> noisy(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledVector> data(n);
    for (auto& r : data) {
        for (auto& v : r.features.values) v = std::floor(rng.uniform() * 10);
        r.label = rng.uniform() < 0.2 + 0.06 * r.features.values[3] ? 1 : 0;
    }
    data[0].label = 0;
    data[1].label = 1;
    return data;
}

}  // namespace

TEST_CASE("empty model and a hand-built stump") {
    const TreeEnsembleModel empty(stump_hp(), 0.0, {});
    FeatureVector fv;
    CHECK(predict_proba(empty, fv) == 0.5);

    const auto stump = urgency_stump(2.0);
    fv[Feature::urgency_count] = 3;
    CHECK(predict_proba(stump, fv) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));
    CHECK(predict_proba(stump, fv) == doctest::Approx(0.8807970779778823));
    fv[Feature::urgency_count] = 0;
    CHECK(predict_proba(stump, fv) == 0.5);
}

TEST_CASE("vectors from another schema are refused") {
    FeatureVector fv;
    fv.schema_hash ^= 1;
    CHECK_THROWS_AS(predict_proba(urgency_stump(1.0), fv), ModelError);
    const TreeEnsembleModel foreign(stump_hp(), 0.0, {}, feature_schema_hash() ^ 1);
    CHECK_FALSE(foreign.schema_matches());
    CHECK_THROWS_AS(predict_proba(foreign, FeatureVector{}), ModelError);
}

TEST_CASE("structural validation of trees") {
    Tree bad_feature;
    bad_feature.nodes = {{35, 0.0, 0.0, 1, 2}, {}, {}};
    CHECK_THROWS_AS(TreeEnsembleModel(stump_hp(), 0.0, {bad_feature}), ModelError);
    Tree cycle;
    cycle.nodes = {{0, 0.0, 0.0, 0, 1}, {}};
    CHECK_THROWS_AS(TreeEnsembleModel(stump_hp(), 0.0, {cycle}), ModelError);
    Tree too_deep;
    too_deep.nodes = {{0, 0.0, 0.0, 1, 2}, {1, 0.0, 0.0, 3, 4}, {}, {}, {}};
    CHECK_THROWS_AS(TreeEnsembleModel(stump_hp(), 0.0, {too_deep}), ModelError);
}

TEST_CASE("training preconditions") {
    std::vector<LabeledVector> ones(5);
    for (auto& r : ones) r.label = 1;
    CHECK_THROWS_AS(train(ones, stump_hp()), DataError);
    CHECK_THROWS_AS(train(std::vector<LabeledVector>{}, stump_hp()), DataError);
    auto bad = ones;
    bad[0].label = 2;
    CHECK_THROWS_AS(train(bad, stump_hp()), DataError);
    Hyperparameters hp = stump_hp();
    hp.depth = 0;
    CHECK_THROWS_AS(train(separable(10, 1), hp), ConfigError);
}

TEST_CASE("identical features with mixed labels predict one half") {
    std::vector<LabeledVector> data(2);
    data[0].label = 1;
    Hyperparameters hp;
    hp.iterations = 20;
    const auto model = train(data, hp);
    CHECK(predict_proba(model, data[0].features) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("training loss falls on separable data") {
    const auto data = separable(200, 3);
    Hyperparameters hp;
    hp.iterations = 50;
    hp.depth = 3;
    hp.learning_rate = 0.1;
    TrainingLog log;
    const auto model = train(data, hp, &log);
    REQUIRE(log.loss.size() == 50);
    CHECK(log.loss.back() < log.loss.front());
    CHECK(log.loss.back() == doctest::Approx(logistic_loss(model, data)).epsilon(1e-12));
    for (const auto& t : model.trees()) CHECK(t.depth() <= 3);
}

TEST_CASE("property: first split matches the exhaustive oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 3000; ++trial) {
        const auto data = test::random_small_instance(rng);
        const double lr = 0.05 + 0.5 * rng.uniform();
        const double l2 = 3.0 * rng.uniform();
        const auto expected = test::brute_force_stump(data, l2, lr);
        const auto model = train(data, stump_hp(lr, l2));
        REQUIRE(model.trees().size() == 1);
        const auto& nodes = model.trees()[0].nodes;
        CAPTURE(trial);
        if (expected.feature < 0) {
            REQUIRE(nodes.size() == 1);
            REQUIRE(nodes[0].value == doctest::Approx(expected.root_value).epsilon(1e-12));
            continue;
        }
        REQUIRE(nodes.size() == 3);
        REQUIRE(nodes[0].feature == expected.feature);
        REQUIRE(nodes[0].threshold == expected.threshold);
        REQUIRE(nodes[nodes[0].left].value == doctest::Approx(expected.left_value).epsilon(1e-12));
        REQUIRE(nodes[nodes[0].right].value == doctest::Approx(expected.right_value).epsilon(1e-12));
        std::size_t pos = 0;
        for (const auto& r : data) pos += r.label;
        const double prior = static_cast<double>(pos) / data.size();
        REQUIRE(model.base_score() == doctest::Approx(std::log(prior / (1 - prior))).epsilon(1e-12));
    }
}

TEST_CASE("property: loss is non-increasing with full rows and small learning rates") {
    Rng rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        Hyperparameters hp;
        hp.iterations = 40;
        hp.depth = 1 + static_cast<int>(rng.below(5));
        hp.learning_rate = 0.01 + 0.29 * rng.uniform();
        hp.l2_leaf_reg = 3 * rng.uniform();
        const auto data = noisy(60 + rng.below(140), rng.next());
        TrainingLog log;
        (void)train(data, hp, &log);
        double prev = log.initial_loss;
        for (double l : log.loss) {
            REQUIRE(l <= prev);
            prev = l;
        }
    }
}

TEST_CASE("property: probabilities stay inside the open unit interval") {
    Hyperparameters hp;
    hp.iterations = 200;
    hp.depth = 4;
    hp.learning_rate = 1.0;
    hp.l2_leaf_reg = 0.0;
    const auto data = separable(100, 5);
    const auto model = train(data, hp);
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        FeatureVector fv;
        for (auto& v : fv.values) v = (rng.uniform() - 0.5) * 1e6;
        const double p = predict_proba(model, fv);
        REQUIRE(p > 0.0);
        REQUIRE(p < 1.0);
    }
}

TEST_CASE("serialization round trip is bit-exact") {
    Hyperparameters hp;
    hp.iterations = 30;
    hp.depth = 4;
    hp.subsample = 0.7;
    hp.seed = 17;
    const auto model = train(noisy(300, 8), hp);
    const std::string text = serialize_model(model);
    const auto back = parse_model(text);
    CHECK(serialize_model(back) == text);

    const auto path = std::filesystem::temp_directory_path() / "becs_test_model.becs";
    save_model(model, path);
    const auto loaded = load_model(path);
    CHECK(loaded.schema_matches);
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        FeatureVector fv;
        for (auto& v : fv.values) v = std::floor(rng.uniform() * 12) - 1;
        REQUIRE(predict_proba(loaded.model, fv) == predict_proba(model, fv));
    }
    std::filesystem::remove(path);
}

TEST_CASE("corrupt model files are rejected") {
    const std::string text = serialize_model(train(noisy(100, 2), stump_hp()));
    CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), ModelError);
    CHECK_THROWS_AS(parse_model(""), ModelError);
    CHECK_THROWS_AS(parse_model("becs-gbdt-model 99\n"), ModelError);

    const TreeEnsembleModel stump = urgency_stump(1.0);
    std::string s = serialize_model(stump);
    const auto at = s.find("split 3 ");
    REQUIRE(at != std::string::npos);
    s.replace(at, 8, "split 35 ");
    CHECK_THROWS_AS(parse_model(s), ModelError);

    CHECK_THROWS_AS(load_model("/nonexistent/model.becs"), ModelError);
}

TEST_CASE("foreign schema survives loading but is flagged") {
    const TreeEnsembleModel foreign(stump_hp(), 0.0, {}, 0x1234);
    const auto path = std::filesystem::temp_directory_path() / "becs_test_foreign.becs";
    save_model(foreign, path);
    const auto loaded = load_model(path);
    CHECK_FALSE(loaded.schema_matches);
    std::filesystem::remove(path);
}

TEST_CASE("same data, settings and seed give identical model bytes") {
    Hyperparameters hp;
    hp.iterations = 25;
    hp.depth = 3;
    hp.subsample = 0.6;
    const auto data = noisy(250, 4);
    CHECK(serialize_model(train(data, hp)) == serialize_model(train(data, hp)));
}

TEST_CASE("permutation importance") {
    const auto data = separable(200, 12);

    const TreeEnsembleModel blind(stump_hp(), 0.3, {});
    for (const auto& fi : permutation_importance(blind, data, 1)) CHECK(fi.importance == 0.0);

    const auto ranked = permutation_importance(urgency_stump(4.0), data, 1);
    REQUIRE(ranked.size() == kFeatureCount);
    CHECK(ranked.front().feature == Feature::urgency_count);
    CHECK(ranked.front().name == "urgency_count");
    CHECK(ranked.front().importance > 0.0);

    // A constant column is unchanged by any permutation.
    auto constant = data;
    for (auto& r : constant) r.features[Feature::urgency_count] = 2;
    for (const auto& fi : permutation_importance(urgency_stump(4.0), constant, 1))
        if (fi.feature == Feature::urgency_count) CHECK(fi.importance == 0.0);

    CHECK(permutation_importance(urgency_stump(4.0), data, 7, 3).front().feature == Feature::urgency_count);
}
