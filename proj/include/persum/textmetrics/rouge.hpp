#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "persum/textmetrics/tokenize.hpp"
#include "persum/util/error.hpp"

namespace persum::textmetrics {

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail {

inline PrfScore make_prf(double overlap, std::size_t cand_total, std::size_t ref_total) {
    PrfScore s;
    s.precision = cand_total == 0 ? 0.0 : overlap / static_cast<double>(cand_total);
    s.recall = ref_total == 0 ? 0.0 : overlap / static_cast<double>(ref_total);
    s.f1 = (s.precision + s.recall) == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(std::span<const std::string> toks,
                                                                    std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (toks.size() < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                          toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

} // namespace detail

/// Clipped n-gram overlap. Denominators that are zero yield 0.
inline PrfScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, std::size_t n) {
    if (n == 0) throw ParameterError("rouge_n requires n >= 1");
    auto cand = detail::ngram_counts(candidate.tokens, n);
    auto ref = detail::ngram_counts(reference.tokens, n);
    std::size_t overlap = 0;
    for (const auto& [gram, c] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(c, it->second);
    }
    auto total = [n](const TokenSeq& s) { return s.size() >= n ? s.size() - n + 1 : std::size_t{0}; };
    return detail::make_prf(static_cast<double>(overlap), total(candidate), total(reference));
}

/// Longest common subsequence length, O(|a|·|b|) time, O(|b|) memory.
template <typename Seq>
std::size_t lcs_length(const Seq& a, const Seq& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline PrfScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    auto l = lcs_length(candidate.tokens, reference.tokens);
    return detail::make_prf(static_cast<double>(l), candidate.size(), reference.size());
}

/// Mean of ROUGE-{1,2,L} precision and recall (six values).
inline double rouge_proxy(const TokenSeq& candidate, const TokenSeq& reference) {
    auto r1 = rouge_n(candidate, reference, 1);
    auto r2 = rouge_n(candidate, reference, 2);
    auto rl = rouge_l(candidate, reference);
    return (r1.precision + r1.recall + r2.precision + r2.recall + rl.precision + rl.recall) / 6.0;
}

} // namespace persum::textmetrics
