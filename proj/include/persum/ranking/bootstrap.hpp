#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "persum/metricbench/winrate.hpp"
#include "persum/ranking/bradley_terry.hpp"
#include "persum/util/io.hpp"
#include "persum/util/parallel.hpp"

namespace persum::ranking {

enum class ComparisonMode { PerDocument, Aggregated };

inline std::string to_string(ComparisonMode m) { return m == ComparisonMode::PerDocument ? "per_document" : "aggregated"; }

inline ComparisonMode parse_comparison_mode(const std::string& s) {
    if (s == "per_document") return ComparisonMode::PerDocument;
    if (s == "aggregated") return ComparisonMode::Aggregated;
    throw ParameterError("unknown comparison mode: " + s);
}

struct BootstrapOptions {
    std::size_t resamples = 500;
    std::uint64_t seed = 0;
    ComparisonMode mode = ComparisonMode::PerDocument;
    std::size_t jobs = 1;
    std::size_t max_redraws = 5;
    FitOptions fit;
};

struct MethodRank {
    std::string method;
    double mean_ability = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t rank = 0;
    double top_share = 0.0;    // fraction of resamples where this method had the highest ability
    double capped_share = 0.0; // fraction of resamples whose fit was capped
};

struct RankReport {
    std::vector<MethodRank> methods; // best first
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
    ComparisonMode mode = ComparisonMode::PerDocument;
    std::size_t redraws = 0;

    const MethodRank& find(const std::string& m) const {
        for (const auto& r : methods)
            if (r.method == m) return r;
        throw ParameterError("unknown method: " + m);
    }
};

namespace boot_detail {
struct Sample {
    std::vector<double> theta;
    bool capped = false;
    std::size_t redraws = 0;
};
} // namespace boot_detail

/// Resamples documents with replacement, refits abilities on each resample,
/// and ranks methods by their mean bootstrapped ability.
inline RankReport rank_with_bootstrap(const ScoreTable& table, const BootstrapOptions& opt = {}) {
    table.validate();
    if (opt.resamples == 0) throw ParameterError("bootstrap needs at least one resample");
    std::vector<std::string> methods = table.methods;
    std::sort(methods.begin(), methods.end());
    if (std::adjacent_find(methods.begin(), methods.end()) != methods.end())
        throw ParameterError("duplicate method in score table");
    const auto n_docs = table.documents.size();
    const auto m = methods.size();

    std::vector<boot_detail::Sample> samples(opt.resamples);
    parallel_for(opt.resamples, opt.jobs, [&](std::size_t b) {
        const auto base = derive_seed(opt.seed, b);
        for (std::size_t attempt = 0;; ++attempt) {
            auto rng = make_rng(base, attempt);
            std::vector<std::size_t> draw(n_docs);
            for (auto& d : draw) d = uniform_index(rng, n_docs);
            auto outcomes = opt.mode == ComparisonMode::PerDocument ? outcomes_from_scores(table, rng, draw)
                                                                    : aggregated_outcomes(table, rng, draw);
            try {
                auto est = fit_bt(tally(outcomes, methods), opt.fit);
                samples[b] = {est.theta, est.capped, attempt};
                return;
            } catch (const FitError& e) {
                if (attempt >= opt.max_redraws)
                    throw FitError("bootstrap resample " + std::to_string(b) + " failed after " +
                                   std::to_string(attempt + 1) + " draws: " + e.what());
            }
        }
    });

    RankReport report;
    report.resamples = opt.resamples;
    report.seed = opt.seed;
    report.mode = opt.mode;
    std::vector<std::vector<double>> per_method(m);
    std::vector<std::size_t> top(m, 0);
    std::size_t capped = 0;
    for (const auto& s : samples) {
        report.redraws += s.redraws;
        if (s.capped) ++capped;
        std::size_t best = 0;
        for (std::size_t i = 0; i < m; ++i) {
            per_method[i].push_back(s.theta[i]);
            if (s.theta[i] > s.theta[best]) best = i;
        }
        ++top[best];
    }
    const double B = static_cast<double>(opt.resamples);
    for (std::size_t i = 0; i < m; ++i) {
        MethodRank r;
        r.method = methods[i];
        double sum = 0.0;
        for (double t : per_method[i]) sum += t;
        r.mean_ability = sum / B;
        auto sorted = per_method[i];
        std::sort(sorted.begin(), sorted.end());
        r.ci_lo = metricbench::percentile(sorted, 0.025);
        r.ci_hi = metricbench::percentile(sorted, 0.975);
        r.top_share = static_cast<double>(top[i]) / B;
        r.capped_share = static_cast<double>(capped) / B;
        report.methods.push_back(r);
    }
    std::stable_sort(report.methods.begin(), report.methods.end(),
                     [](const MethodRank& a, const MethodRank& b) { return a.mean_ability > b.mean_ability; });
    for (std::size_t i = 0; i < m; ++i) report.methods[i].rank = i + 1;
    return report;
}

inline Json to_json(const RankReport& r) {
    Json out = Json::object();
    out["mode"] = to_string(r.mode);
    out["B"] = r.resamples;
    out["seed"] = r.seed;
    out["redraws"] = r.redraws;
    Json rows = Json::array();
    for (const auto& m : r.methods) {
        rows.push_back({{"method", m.method},
                        {"mean_ability", m.mean_ability},
                        {"ci95", Json::array({m.ci_lo, m.ci_hi})},
                        {"rank", m.rank},
                        {"top_share", m.top_share},
                        {"capped_share", m.capped_share},
                        {"B", r.resamples},
                        {"seed", r.seed}});
    }
    out["methods"] = rows;
    return out;
}

inline std::string render_table(const RankReport& r) {
    std::string out = "rank  method                      ability   95% CI\n";
    char buf[256];
    for (const auto& m : r.methods) {
        std::snprintf(buf, sizeof buf, "%4zu  %-26s %8.3f   [%.3f, %.3f]\n", m.rank, m.method.c_str(), m.mean_ability, m.ci_lo,
                      m.ci_hi);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "B=%zu resamples, seed=%llu, %s comparisons\n", r.resamples,
                  static_cast<unsigned long long>(r.seed), to_string(r.mode).c_str());
    out += buf;
    return out;
}

/// Reads a score table from {"methods":[...], "documents":[...], "scores":{method:{doc:score|null}}}.
inline ScoreTable score_table_from_json(const Json& j) {
    ScoreTable t;
    t.methods = require<std::vector<std::string>>(j, "methods", "score table");
    t.documents = require<std::vector<std::string>>(j, "documents", "score table");
    const auto& scores = j.at("scores");
    for (const auto& m : t.methods) {
        std::vector<std::optional<double>> row;
        const Json* mrow = scores.contains(m) ? &scores.at(m) : nullptr;
        for (const auto& d : t.documents) {
            if (mrow && mrow->contains(d) && !mrow->at(d).is_null()) row.push_back(mrow->at(d).get<double>());
            else row.emplace_back();
        }
        t.scores.push_back(std::move(row));
    }
    t.validate();
    return t;
}

} // namespace persum::ranking
