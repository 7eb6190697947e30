#include <doctest.h>

#include <sstream>

#include "becs/decision.hpp"
#include "becs/error.hpp"
#include "support.hpp"

using namespace becs;

namespace {

const PolicyConfig& policy() {
    static const PolicyConfig cfg = make_policy(test::shipped_lexicons(), test::shipped_map_ptr(), 15);
    return cfg;
}

EmailRecord email(std::string subject, std::string body) {
    return {"e", std::move(subject), std::move(body), std::nullopt, std::nullopt, std::nullopt};
}

const EmailRecord kLongBenign = email("Lunch on Friday",
                                      "Hi team, are you free for lunch on Friday? There is a new place near the office "
                                      "that I have been wanting to try for a while now.");

bool is_review(const Decision& d) { return d.verdict == Verdict::ManualReview; }

}  // namespace

TEST_CASE("grey-zone policy examples") {
    const Thresholds th{0.2, 0.8};
    const Decision safeguard{Verdict::ManualReview, Reason::ShortMessageSafeguard};
    CHECK(decide(email("Pmnt for Johns-Deleon", "Sent from my phon\u0435."), 0.01, th, policy()) == safeguard);
    CHECK(decide(email("", "Pmnt sent from my phone"), 0.01, th, policy()) == safeguard);
    CHECK(decide(kLongBenign, 0.01, th, policy()) == Decision{Verdict::AutoAllow, Reason::BelowLow});
    CHECK(decide(kLongBenign, 0.95, th, policy()) == Decision{Verdict::AutoBlock, Reason::AboveHigh});
    CHECK(decide(kLongBenign, 0.2, th, policy()) == Decision{Verdict::ManualReview, Reason::GreyZone});
    CHECK(decide(kLongBenign, 0.8, th, policy()) == Decision{Verdict::ManualReview, Reason::GreyZone});
}

TEST_CASE("safeguard needs both a short body and a financial keyword") {
    CHECK_FALSE(safeguard_applies(email("Hello", "See you at three."), policy()));
    CHECK(safeguard_applies(email("Hello", "Invoice attached."), policy()));
    CHECK(safeguard_applies(email("Wire today", "Thanks."), policy()));
    // Confusables are normalized before the keyword check.
    CHECK(safeguard_applies(email("Hello", "P\u0430yment attached."), policy()));
    // Subject words do not count toward the length.
    const std::string fourteen = "one two three four five six seven eight nine ten eleven twelve thirteen invoice";
    CHECK(safeguard_applies(email("", fourteen), policy()));
    CHECK_FALSE(safeguard_applies(email("", fourteen + " fifteen"), policy()));

    PolicyConfig off = policy();
    off.min_words = 0;
    CHECK_FALSE(safeguard_applies(email("", "Invoice"), off));
}

TEST_CASE("verdict and reason names") {
    CHECK(to_string(Verdict::ManualReview) == "ManualReview");
    CHECK(to_string(Reason::ShortMessageSafeguard) == "ShortMessageSafeguard");
    CHECK(to_string(Verdict::AutoAllow) == "AutoAllow");
    CHECK(to_string(Reason::GreyZone) == "GreyZone");
}

TEST_CASE("threshold and cost validation") {
    CHECK_THROWS_AS((Thresholds{0.5, 0.4}.validate()), ConfigError);
    CHECK_THROWS_AS((Thresholds{-0.1, 0.4}.validate()), ConfigError);
    CHECK_THROWS_AS((Thresholds{0.1, 1.1}.validate()), ConfigError);
    CHECK_NOTHROW((Thresholds{0.3, 0.3}.validate()));
    CHECK_THROWS_AS((CostModel{-1, 25, 25}.validate()), ConfigError);
}

TEST_CASE("property: exactly one consistent verdict everywhere") {
    Rng rng(31);
    for (int i = 0; i < 20000; ++i) {
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        const Thresholds th{a, b};
        const double p = rng.below(10) == 0 ? (rng.below(2) ? a : b) : rng.uniform();
        const Decision d = decide_score(p, th);
        const int branches = (p < a) + (p > b) + (p >= a && p <= b);
        REQUIRE(branches == 1);
        if (p < a) REQUIRE(d == Decision{Verdict::AutoAllow, Reason::BelowLow});
        else if (p > b) REQUIRE(d == Decision{Verdict::AutoBlock, Reason::AboveHigh});
        else REQUIRE(d == Decision{Verdict::ManualReview, Reason::GreyZone});
        REQUIRE(is_review(d) == (d.reason == Reason::GreyZone || d.reason == Reason::ShortMessageSafeguard));
    }
}

TEST_CASE("property: safeguard dominates any score") {
    Rng rng(32);
    const auto short_pay = email("Pmnt for Johns-Deleon", "Sent from my phone.");
    for (int i = 0; i < 2000; ++i) {
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        REQUIRE(decide(short_pay, rng.uniform(), {a, b}, policy()).reason == Reason::ShortMessageSafeguard);
    }
}

TEST_CASE("expected loss examples") {
    const CostModel costs;
    CHECK(expected_loss({1, 37, 0}, costs) == 137925.0);
    CHECK(expected_loss({0, 0, 0}, costs) == 0.0);
    CHECK(expected_loss({0, 0, 4}, costs) == 100.0);
}

TEST_CASE("property: loss is strictly increasing in each error count") {
    const CostModel costs;
    Rng rng(33);
    for (int i = 0; i < 1000; ++i) {
        const OutcomeCounts base{rng.below(50), rng.below(5000), rng.below(500)};
        const double l = expected_loss(base, costs);
        REQUIRE(expected_loss({base.fn + 1, base.fp, base.grey}, costs) > l);
        REQUIRE(expected_loss({base.fn, base.fp + 1, base.grey}, costs) > l);
        REQUIRE(expected_loss({base.fn, base.fp, base.grey + 1}, costs) > l);
    }
}

TEST_CASE("one missed fraud is worth 5480 false alarms") {
    const CostModel costs;
    const double one_fn = expected_loss({1, 0, 0}, costs);
    CHECK(expected_loss({0, 5479, 0}, costs) < one_fn);
    CHECK(expected_loss({0, 5481, 0}, costs) > one_fn);
    CHECK(expected_loss({0, 5480, 0}, costs) == one_fn);
}

TEST_CASE("cost surface on perfectly separated scores reaches zero") {
    const std::vector<double> s = {0.0, 0.01, 0.02, 0.98, 0.99, 1.0};
    const std::vector<int> y = {0, 0, 0, 1, 1, 1};
    const auto surface = sweep_cost_surface(s, y, CostModel{}, 0.05);
    const auto [th, cost] = optimal_thresholds(surface);
    CHECK(cost == 0.0);
    for (const auto& p : surface.points) CHECK(p.tau_low <= p.tau_high);
    CHECK(surface.points.size() == 21 * 22 / 2);
}

TEST_CASE("all-grey surface") {
    const std::vector<double> s(10, 0.5);
    const std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 0, 0, 1};
    const CostModel costs;
    for (const auto& p : sweep_cost_surface(s, y, costs).points)
        if (p.tau_low <= 0.5 && 0.5 <= p.tau_high) REQUIRE(p.total_usd == 10 * costs.c_rev);
}

TEST_CASE("per-email transaction values replace the flat value") {
    const std::vector<double> s = {0.1, 0.1};
    const std::vector<int> y = {1, 1};
    const std::vector<std::optional<double>> v = {1000.0, std::nullopt};
    const auto surface = sweep_cost_surface(s, y, v, CostModel{}, 0.5);
    // tau = (0.5, 0.5): both frauds allowed.
    for (const auto& p : surface.points)
        if (p.tau_low == 0.5 && p.tau_high == 0.5) CHECK(p.total_usd == 1000.0 + 137000.0);
}

TEST_CASE("optimum tie rule") {
    CostSurface surface{0.1, {{0.1, 0.5, {}, 10.0}, {0.0, 0.5, {}, 10.0}, {0.0, 0.9, {}, 10.0}, {0.2, 0.3, {}, 11.0}}};
    const auto [th, cost] = optimal_thresholds(surface);
    CHECK(th.tau_low == 0.0);
    CHECK(th.tau_high == 0.5);
    CHECK(cost == 10.0);

    CostSurface unique{0.1, {{0.1, 0.5, {}, 3.0}, {0.0, 0.5, {}, 10.0}}};
    CHECK(optimal_thresholds(unique).first.tau_low == 0.1);
    CHECK_THROWS_AS(optimal_thresholds(CostSurface{0.1, {}}), DataError);
}

TEST_CASE("property: the optimum is no worse than any grid point") {
    Rng rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 60; ++i) {
            s.push_back(rng.uniform());
            y.push_back(rng.bernoulli(s.back()) ? 1 : 0);
        }
        const CostModel costs{1000.0 * (1 + rng.below(100)), 25, 5.0 * (1 + rng.below(10))};
        const auto surface = sweep_cost_surface(s, y, costs, 0.02);
        const double best = optimal_thresholds(surface).second;
        for (const auto& p : surface.points) {
            REQUIRE(best <= p.total_usd);
            REQUIRE(p.total_usd == expected_loss(p.outcomes, costs));
        }
    }
}

TEST_CASE("calibrated scores push the lower threshold to the bottom of the grid") {
    Rng rng(35);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.uniform();
        const double p = u * u * u;
        s.push_back(p);
        y.push_back(rng.bernoulli(p) ? 1 : 0);
    }
    const auto [th, cost] = optimal_thresholds(sweep_cost_surface(s, y, CostModel{}));
    CHECK(th.tau_low <= 0.05);
}

TEST_CASE("ROI sensitivity") {
    const CostModel costs;
    const std::vector<double> v = {50'000, 137'000, 250'000};

    const std::vector<double> perfect = {0.0, 0.0, 1.0, 1.0};
    const std::vector<int> y4 = {0, 0, 1, 1};
    for (const auto& p : roi_sensitivity(perfect, y4, costs, v)) CHECK(p.roi == 1.0);

    // Constant zero scores with one cheap fraud: allowing everything is optimal.
    std::vector<double> zeros(100, 0.0);
    std::vector<int> y(100, 0);
    y[7] = 1;
    const std::vector<double> tiny = {1.0};
    const auto allow_all = roi_sensitivity(zeros, y, costs, tiny);
    CHECK(allow_all[0].roi == 0.0);
    CHECK(allow_all[0].defended_loss == allow_all[0].baseline_loss);

    Rng rng(36);
    std::vector<double> s;
    std::vector<int> labels;
    for (int i = 0; i < 1000; ++i) {
        const int label = i % 2;
        labels.push_back(label);
        s.push_back(label ? 0.9 + 0.1 * rng.uniform() : 0.1 * rng.uniform());
    }
    s[0] = 0.95;  // one legitimate email looks like fraud
    for (const auto& p : roi_sensitivity(s, labels, costs, v)) {
        CHECK(p.roi > 0.999);
        CHECK(p.baseline_loss == 500 * p.v_transaction);
    }

    CHECK_THROWS_AS(roi_sensitivity(zeros, std::vector<int>(100, 0), costs, v), DataError);
    const std::vector<double> bad_v = {0.0};
    CHECK_THROWS_AS(roi_sensitivity(perfect, y4, costs, bad_v), ConfigError);
}

TEST_CASE("surface export") {
    const std::vector<double> s = {0.2, 0.7};
    const std::vector<int> y = {0, 1};
    std::ostringstream out;
    write_surface(out, sweep_cost_surface(s, y, CostModel{}, 0.5));
    const std::string text = out.str();
    CHECK(text.rfind("# ", 0) == 0);
    CHECK(text.find("tau_low\ttau_high\tfn\tfp\tgrey\ttotal_usd\n") != std::string::npos);
    CHECK(text.find("0.5000\t0.5000\t0\t0\t0\t0.00\n") != std::string::npos);
}
