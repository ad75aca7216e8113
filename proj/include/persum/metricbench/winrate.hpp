#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "persum/util/error.hpp"
#include "persum/util/random.hpp"

namespace persum::metricbench {

enum class TieMode {
    Random,     // seeded coin flip decides a metric tie
    HalfCredit, // a metric tie counts 0.5
};

struct WinrateOptions {
    TieMode ties = TieMode::Random;
    std::size_t bootstrap = 500;
    std::uint64_t seed = 0;
};

struct WinrateResult {
    double winrate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_metric_ties = 0;
};

/// Empirical quantile with linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw ParameterError("percentile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

/// Share of within-article summary pairs (strictly different ground truth)
/// that the metric orders the same way as the ground truth. The 95% CI is a
/// percentile bootstrap over articles.
inline WinrateResult winrate(std::span<const double> metric, std::span<const double> truth,
                             std::span<const std::string> article, const WinrateOptions& opt = {}) {
    if (metric.size() != truth.size() || metric.size() != article.size()) {
        throw ParameterError("winrate: metric, truth and article tags differ in length");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < article.size(); ++i) groups[article[i]].push_back(i);

    auto rng = make_rng(opt.seed);
    // Per-article (credit, pairs); tie flips are drawn once here and reused by
    // every bootstrap resample.
    std::vector<std::pair<double, std::size_t>> per_article;
    WinrateResult res;
    for (const auto& [name, idx] : groups) {
        double credit = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                auto i = idx[a], j = idx[b];
                if (truth[i] == truth[j]) continue;
                ++pairs;
                bool i_better = truth[i] > truth[j];
                if (metric[i] == metric[j]) {
                    ++res.n_metric_ties;
                    credit += opt.ties == TieMode::HalfCredit ? 0.5 : (coin_flip(rng) ? 1.0 : 0.0);
                } else if ((metric[i] > metric[j]) == i_better) {
                    credit += 1.0;
                }
            }
        }
        per_article.emplace_back(credit, pairs);
    }
    double credit = 0.0;
    for (const auto& [c, p] : per_article) {
        credit += c;
        res.n_pairs += p;
    }
    if (res.n_pairs == 0) throw UndefinedMetricError("winrate: no within-article pair has distinct ground truth");
    res.winrate = credit / static_cast<double>(res.n_pairs);

    if (opt.bootstrap == 0) {
        res.ci_lo = res.ci_hi = res.winrate;
        return res;
    }
    std::vector<double> boots;
    boots.reserve(opt.bootstrap);
    for (std::size_t b = 0; b < opt.bootstrap; ++b) {
        auto brng = make_rng(opt.seed, b + 1);
        double c = 0.0;
        std::size_t p = 0;
        for (std::size_t k = 0; k < per_article.size(); ++k) {
            const auto& pa = per_article[uniform_index(brng, per_article.size())];
            c += pa.first;
            p += pa.second;
        }
        if (p > 0) boots.push_back(c / static_cast<double>(p));
    }
    res.ci_lo = std::min(percentile(boots, 0.025), res.winrate);
    res.ci_hi = std::max(percentile(boots, 0.975), res.winrate);
    return res;
}

} // namespace persum::metricbench
