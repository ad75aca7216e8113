#pragma once

#include <set>
#include <string>
#include <vector>

#include "persum/textmetrics/tokenize.hpp"
#include "persum/util/error.hpp"

namespace persum::textmetrics {

/// Share of summary n-gram positions whose n-gram never occurs in the article.
inline double novel_ngram_ratio(const TokenSeq& summary, const TokenSeq& article, std::size_t n = 4) {
    if (n == 0) throw ParameterError("novel_ngram_ratio requires n >= 1");
    if (summary.size() < n) {
        throw UndefinedMetricError("summary has " + std::to_string(summary.size()) +
                                   " tokens, fewer than n=" + std::to_string(n));
    }
    std::set<std::vector<std::string>> seen;
    for (std::size_t i = 0; i + n <= article.size(); ++i) {
        seen.emplace(article.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     article.tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    std::size_t total = summary.size() - n + 1;
    std::size_t novel = 0;
    for (std::size_t i = 0; i < total; ++i) {
        std::vector<std::string> gram(summary.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      summary.tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
        if (!seen.contains(gram)) ++novel;
    }
    return static_cast<double>(novel) / static_cast<double>(total);
}

/// A shared span: summary tokens [summary_begin, summary_begin+length) equal
/// article tokens [article_begin, article_begin+length).
struct Fragment {
    std::size_t summary_begin = 0;
    std::size_t article_begin = 0;
    std::size_t length = 0;
};

struct FragmentSet {
    std::vector<Fragment> fragments;
};

struct FragmentStats {
    FragmentSet set;
    double coverage = 0.0;    // (1/|S|) Σ|f|
    double density = 0.0;     // (1/|S|) Σ|f|²
    double compression = 0.0; // |A| / |S|
};

/// Greedy left-to-right matching: at each summary position take the longest
/// article span starting there (earliest article occurrence on ties), consume
/// it, and continue after it.
inline FragmentSet greedy_fragments(const TokenSeq& article, const TokenSeq& summary) {
    const auto& a = article.tokens;
    const auto& s = summary.tokens;
    FragmentSet out;
    std::size_t i = 0;
    while (i < s.size()) {
        Fragment best;
        for (std::size_t j = 0; j < a.size(); ++j) {
            std::size_t len = 0;
            while (i + len < s.size() && j + len < a.size() && s[i + len] == a[j + len]) ++len;
            if (best.length < len) best = Fragment{i, j, len};
        }
        if (best.length > 0) {
            out.fragments.push_back(best);
            i += best.length;
        } else {
            ++i;
        }
    }
    return out;
}

inline FragmentStats extractive_fragments(const TokenSeq& article, const TokenSeq& summary) {
    if (summary.empty()) throw UndefinedMetricError("extractive fragments need a non-empty summary");
    FragmentStats st;
    st.set = greedy_fragments(article, summary);
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& f : st.set.fragments) {
        auto len = static_cast<double>(f.length);
        sum += len;
        sum_sq += len * len;
    }
    auto n = static_cast<double>(summary.size());
    st.coverage = sum / n;
    st.density = sum_sq / n;
    st.compression = static_cast<double>(article.size()) / n;
    return st;
}

} // namespace persum::textmetrics
