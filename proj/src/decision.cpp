#include "becs/decision.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "becs/error.hpp"
#include "becs/features.hpp"

namespace becs {

void Thresholds::validate() const {
    if (!(tau_low >= 0.0 && tau_low <= tau_high && tau_high <= 1.0))
        throw ConfigError("thresholds must satisfy 0 <= tau_low <= tau_high <= 1");
}

void CostModel::validate() const {
    for (double v : {v_transaction, c_inv, c_rev})
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("costs must be finite and >= 0");
}

PolicyConfig make_policy(const LexiconSet& lexicons, std::shared_ptr<const HomoglyphMap> map, std::size_t min_words) {
    PolicyConfig cfg;
    cfg.min_words = min_words;
    cfg.financial_keywords = std::make_shared<const TermMatcher>(lexicons.terms(Lexicon::financial_keywords));
    cfg.homoglyphs = std::move(map);
    return cfg;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::AutoAllow:
            return "AutoAllow";
        case Verdict::AutoBlock:
            return "AutoBlock";
        case Verdict::ManualReview:
            return "ManualReview";
    }
    return "?";
}

std::string_view to_string(Reason r) {
    switch (r) {
        case Reason::BelowLow:
            return "BelowLow";
        case Reason::AboveHigh:
            return "AboveHigh";
        case Reason::GreyZone:
            return "GreyZone";
        case Reason::ShortMessageSafeguard:
            return "ShortMessageSafeguard";
    }
    return "?";
}

bool safeguard_applies(const EmailRecord& email, const PolicyConfig& cfg) {
    const auto normalized = [&](const std::string& text) {
        return cfg.homoglyphs ? normalize(text, *cfg.homoglyphs).text : text;
    };
    const std::string body = normalized(email.body);
    if (word_count(body) >= cfg.min_words) return false;
    if (!cfg.financial_keywords) return false;
    return cfg.financial_keywords->any(lexical_tokens(std::string_view(body))) ||
           cfg.financial_keywords->any(lexical_tokens(std::string_view(normalized(email.subject))));
}

Decision decide_score(double p, const Thresholds& th) {
    if (p < th.tau_low) return {Verdict::AutoAllow, Reason::BelowLow};
    if (p > th.tau_high) return {Verdict::AutoBlock, Reason::AboveHigh};
    return {Verdict::ManualReview, Reason::GreyZone};
}

Decision decide(const EmailRecord& email, double p, const Thresholds& th, const PolicyConfig& cfg) {
    if (safeguard_applies(email, cfg)) return {Verdict::ManualReview, Reason::ShortMessageSafeguard};
    return decide_score(p, th);
}

double expected_loss(const OutcomeCounts& outcomes, const CostModel& costs) {
    return static_cast<double>(outcomes.fn) * costs.v_transaction + static_cast<double>(outcomes.fp) * costs.c_inv +
           static_cast<double>(outcomes.grey) * costs.c_rev;
}

namespace {

std::vector<double> grid_values(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw ConfigError("grid step must be in (0, 0.5]");
    std::vector<double> grid;
    for (std::size_t i = 0;; ++i) {
        const double v = static_cast<double>(i) * step;
        if (v > 1.0 + 1e-9) break;
        grid.push_back(std::min(v, 1.0));
    }
    if (grid.back() < 1.0 - 1e-9) grid.push_back(1.0);
    return grid;
}

}  // namespace

CostSurface sweep_cost_surface(std::span<const double> scores, std::span<const int> labels,
                               std::span<const std::optional<double>> values, const CostModel& costs, double step) {
    if (scores.empty()) throw DataError("cost surface needs at least one score");
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    if (!values.empty() && values.size() != scores.size()) throw DataError("values and scores differ in length");
    costs.validate();

    const auto grid = grid_values(step);
    CostSurface surface{step, {}};
    surface.points.reserve(grid.size() * (grid.size() + 1) / 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i; j < grid.size(); ++j) {
            const Thresholds th{grid[i], grid[j]};
            OutcomeCounts counts;
            double fn_value = 0.0;
            for (std::size_t k = 0; k < scores.size(); ++k) {
                const Verdict v = decide_score(scores[k], th).verdict;
                if (v == Verdict::ManualReview) {
                    ++counts.grey;
                } else if (labels[k] == 1 && v == Verdict::AutoAllow) {
                    ++counts.fn;
                    fn_value += !values.empty() && values[k] ? *values[k] : costs.v_transaction;
                } else if (labels[k] == 0 && v == Verdict::AutoBlock) {
                    ++counts.fp;
                }
            }
            const double total = fn_value + static_cast<double>(counts.fp) * costs.c_inv +
                                 static_cast<double>(counts.grey) * costs.c_rev;
            surface.points.push_back({th.tau_low, th.tau_high, counts, total});
        }
    }
    return surface;
}

CostSurface sweep_cost_surface(std::span<const double> scores, std::span<const int> labels, const CostModel& costs,
                               double step) {
    return sweep_cost_surface(scores, labels, {}, costs, step);
}

std::pair<Thresholds, double> optimal_thresholds(const CostSurface& surface) {
    if (surface.points.empty()) throw DataError("cost surface is empty");
    const SurfacePoint* best = &surface.points.front();
    for (const auto& p : surface.points) {
        if (p.total_usd < best->total_usd ||
            (p.total_usd == best->total_usd &&
             (p.tau_low < best->tau_low || (p.tau_low == best->tau_low && p.tau_high < best->tau_high))))
            best = &p;
    }
    return {Thresholds{best->tau_low, best->tau_high}, best->total_usd};
}

std::vector<RoiPoint> roi_sensitivity(std::span<const double> scores, std::span<const int> labels,
                                      const CostModel& costs, std::span<const double> v_range, double step) {
    if (v_range.empty()) throw ConfigError("ROI sensitivity needs at least one transaction value");
    std::size_t frauds = 0;
    for (int y : labels) frauds += y == 1;
    if (frauds == 0) throw DataError("ROI is undefined without fraud samples");

    std::vector<RoiPoint> out;
    for (double v : v_range) {
        if (!(v > 0.0)) throw ConfigError("transaction values must be > 0");
        CostModel c = costs;
        c.v_transaction = v;
        const auto [th, defended] = optimal_thresholds(sweep_cost_surface(scores, labels, c, step));
        const double baseline = static_cast<double>(frauds) * v;
        out.push_back({v, baseline, defended, th, (baseline - defended) / baseline});
    }
    return out;
}

void write_surface(std::ostream& out, const CostSurface& surface) {
    out << "# score-only policy; the short-message safeguard is score-independent and excluded\n";
    out << "tau_low\ttau_high\tfn\tfp\tgrey\ttotal_usd\n";
    char line[160];
    for (const auto& p : surface.points) {
        std::snprintf(line, sizeof line, "%.4f\t%.4f\t%zu\t%zu\t%zu\t%.2f\n", p.tau_low, p.tau_high, p.outcomes.fn,
                      p.outcomes.fp, p.outcomes.grey, p.total_usd);
        out << line;
    }
}

}  // namespace becs
