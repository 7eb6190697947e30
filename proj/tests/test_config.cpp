#include <doctest.h>

#include <vector>

#include "becs/config.hpp"
#include "becs/error.hpp"
#include "support.hpp"

using namespace becs;

namespace {

RunConfig run_config(std::string_view text) {
    return RunConfig::from(KeyValueConfig::parse(text), "/base", "/data");
}

std::vector<char*> environment(std::vector<std::string>& storage) {
    std::vector<char*> env;
    for (auto& s : storage) env.push_back(s.data());
    env.push_back(nullptr);
    return env;
}

}  // namespace

TEST_CASE("defaults match the shipped operating point") {
    const RunConfig d = run_config("");
    const RunConfig shipped =
        RunConfig::from(KeyValueConfig::load(test::data_dir() + "/config/paper-table-vi.ini"), "/base", "/data");
    CHECK(d.thresholds.tau_low == 0.12);
    CHECK(d.thresholds.tau_high == 0.12);
    CHECK(d.costs.v_transaction == 137000.0);
    CHECK(d.costs.c_inv == 25.0);
    CHECK(d.costs.c_rev == 25.0);
    CHECK(d.min_words == 15);
    CHECK(d.hp.iterations == 545);
    CHECK(d.hp.depth == 8);
    CHECK(d.hp.learning_rate == 0.0780);
    CHECK(d.hp.l2_leaf_reg == 1.29);
    CHECK(d.split.train_fraction == 0.80);
    CHECK(d.poison.corpus_poison_rate == 0.30);
    CHECK(d.seed == 42);

    CHECK(shipped.thresholds.tau_low == d.thresholds.tau_low);
    CHECK(shipped.costs.v_transaction == d.costs.v_transaction);
    CHECK(shipped.hp.iterations == d.hp.iterations);
    CHECK(shipped.hp.learning_rate == d.hp.learning_rate);
    CHECK(shipped.poison.substitution_probability == d.poison.substitution_probability);
    CHECK(shipped.grid_step == d.grid_step);
}

TEST_CASE("parsing sections, comments and case") {
    const auto kv = KeyValueConfig::parse("# comment\n; other\n[Costs]\n  C_INV = 30  \n\n[model]\ndepth=4\n");
    CHECK(kv.get("costs.c_inv") == "30");
    CHECK(kv.get("model.depth") == "4");
    CHECK_FALSE(kv.get("model.iterations").has_value());

    CHECK_THROWS_AS(KeyValueConfig::parse("key = 1\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("[costs\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("[costs]\nno equals sign\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("[]\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("values are applied and paths resolved") {
    const RunConfig c = run_config(
        "[costs]\nv_transaction = 50000\n[thresholds]\ntau_low = 0.2\ntau_high = 0.8\n"
        "[paths]\nmodel = m.becs\ncorpus = /abs/c.jsonl\n[run]\nseed = 7\n");
    CHECK(c.costs.v_transaction == 50000.0);
    CHECK(c.thresholds.tau_low == 0.2);
    CHECK(c.thresholds.tau_high == 0.8);
    CHECK(c.model == std::filesystem::path("/base/m.becs"));
    CHECK(c.corpus == std::filesystem::path("/abs/c.jsonl"));
    CHECK(c.lexicons == std::filesystem::path("/data/lexicons"));
    CHECK(c.seed == 7);
    CHECK(c.hp.seed == 7);
    CHECK(c.split.seed == 7);
    CHECK(c.poison.seed == 7);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(run_config("[costs]\nv_transactoin = 1\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[costs]\nv_transaction = lots\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[costs]\nv_transaction = 12abc\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[costs]\nc_inv = -5\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[thresholds]\ntau_low = 0.9\ntau_high = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[model]\ndepth = -1\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[model]\ndepth = 0\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[split]\ntrain_fraction = 1\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[run]\npreset = other\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[poison]\npreset = greek\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[evaluate]\nfolds = 1\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[psi]\nbeta = 0\n"), ConfigError);
    CHECK_THROWS_AS(run_config("[optimize]\ngrid_step = 0\n"), ConfigError);
}

TEST_CASE("environment overrides") {
    std::vector<std::string> storage = {"PATH=/usr/bin", "BECS_COSTS_V_TRANSACTION=50000", "BECS_MODEL_DEPTH=3",
                                        "BECS_POLICY_MIN_WORDS=20"};
    auto env = environment(storage);
    auto kv = KeyValueConfig::parse("[costs]\nv_transaction = 1000\n");
    kv.apply_environment(env.data());
    const RunConfig c = RunConfig::from(kv, "/base", "/data");
    CHECK(c.costs.v_transaction == 50000.0);
    CHECK(c.hp.depth == 3);
    CHECK(c.min_words == 20);

    std::vector<std::string> bad = {"BECS_NOUNDERSCORE=1"};
    auto bad_env = environment(bad);
    KeyValueConfig empty;
    CHECK_THROWS_AS(empty.apply_environment(bad_env.data()), ConfigError);

    std::vector<std::string> unknown = {"BECS_COSTS_NOTHING=1"};
    auto unknown_env = environment(unknown);
    KeyValueConfig kv2;
    kv2.apply_environment(unknown_env.data());
    CHECK_THROWS_AS(RunConfig::from(kv2, "/base", "/data"), ConfigError);
}
