#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persum/textmetrics/rouge.hpp"
#include "persum/util/error.hpp"
#include "persum/util/random.hpp"
#include "persum/util/utf8.hpp"

namespace persum::textmetrics {

/// Lowercased code points with whitespace runs collapsed and ends trimmed.
inline std::u32string normalize_excerpt(std::string_view text) {
    auto cps = utf8::decode(text);
    std::u32string out;
    out.reserve(cps.size());
    bool pending_space = false;
    for (char32_t c : cps) {
        bool ws = c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
                  c == 0xA0;
        if (ws) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(U' ');
        pending_space = false;
        out.push_back(c >= U'A' && c <= U'Z' ? c - U'A' + U'a' : c);
    }
    return out;
}

struct MatchedPair {
    std::size_t a_index = 0;
    std::size_t b_index = 0;
    bool by_containment = false;
};

/// True when one normalized excerpt contains the other, or their
/// character-level LCS over the shorter length strictly exceeds tau.
inline bool excerpts_match(const std::u32string& a, const std::u32string& b, double tau, bool* by_containment = nullptr) {
    if (a.find(b) != std::u32string::npos || b.find(a) != std::u32string::npos) {
        if (by_containment) *by_containment = true;
        return true;
    }
    if (by_containment) *by_containment = false;
    auto shorter = std::min(a.size(), b.size());
    if (shorter == 0) return false;
    return static_cast<double>(lcs_length(a, b)) / static_cast<double>(shorter) > tau;
}

/// One-to-one matching: each excerpt of A, in order, takes the first still
/// unmatched excerpt of B that satisfies `excerpts_match`.
inline std::vector<MatchedPair> match_excerpts(std::span<const std::string> e_a, std::span<const std::string> e_b,
                                               double tau = 0.5) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ParameterError("tau must lie in (0, 1]");
    std::vector<std::u32string> na, nb;
    for (const auto& s : e_a) na.push_back(normalize_excerpt(s));
    for (const auto& s : e_b) nb.push_back(normalize_excerpt(s));
    std::vector<bool> used(nb.size(), false);
    std::vector<MatchedPair> out;
    for (std::size_t i = 0; i < na.size(); ++i) {
        for (std::size_t j = 0; j < nb.size(); ++j) {
            if (used[j]) continue;
            bool contained = false;
            if (excerpts_match(na[i], nb[j], tau, &contained)) {
                used[j] = true;
                out.push_back({i, j, contained});
                break;
            }
        }
    }
    return out;
}

struct AgreementReport {
    double r_a_given_b = 0.0;
    double r_b_given_a = 0.0;
    double r_overall = 0.0;
    std::vector<MatchedPair> matches;
};

/// An empty side scores 0 for its conditional unless both sides are empty,
/// in which case both conditionals are 1.
inline AgreementReport agreement(std::span<const std::string> e_a, std::span<const std::string> e_b, double tau = 0.5) {
    AgreementReport r;
    r.matches = match_excerpts(e_a, e_b, tau);
    if (e_a.empty() && e_b.empty()) {
        r.r_a_given_b = r.r_b_given_a = r.r_overall = 1.0;
        return r;
    }
    auto m = static_cast<double>(r.matches.size());
    r.r_a_given_b = e_a.empty() ? 0.0 : m / static_cast<double>(e_a.size());
    r.r_b_given_a = e_b.empty() ? 0.0 : m / static_cast<double>(e_b.size());
    r.r_overall = 0.5 * (r.r_a_given_b + r.r_b_given_a);
    return r;
}

/// Mean and variance of highlight counts per item and of highlight lengths
/// (in characters).
struct HighlightStats {
    double count_mean = 1.0;
    double count_var = 0.0;
    double length_mean = 1.0;
    double length_var = 0.0;
};

/// Sample statistics over annotated items, each item a list of excerpts.
inline HighlightStats highlight_stats(std::span<const std::vector<std::string>> items) {
    if (items.empty()) throw ParameterError("highlight_stats needs at least one item");
    std::vector<double> counts, lengths;
    for (const auto& item : items) {
        counts.push_back(static_cast<double>(item.size()));
        for (const auto& e : item) lengths.push_back(static_cast<double>(utf8::length(e)));
    }
    auto mean_var = [](const std::vector<double>& v) -> std::pair<double, double> {
        if (v.empty()) return {0.0, 0.0};
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        if (v.size() < 2) return {m, 0.0};
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return {m, ss / static_cast<double>(v.size() - 1)};
    };
    HighlightStats st;
    std::tie(st.count_mean, st.count_var) = mean_var(counts);
    std::tie(st.length_mean, st.length_var) = mean_var(lengths);
    return st;
}

struct BaselineEstimate {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation across trials
    std::size_t trials = 0;
};

namespace detail {
inline double draw_normal(Rng& rng, double mean, double var) {
    if (var == 0.0) return mean;
    return normal_draw(rng, mean, std::sqrt(var));
}

inline std::vector<std::string> random_annotation(const std::u32string& text, const HighlightStats& st, Rng& rng) {
    auto len_text = static_cast<long long>(text.size());
    long long count = std::max(1LL, std::llround(draw_normal(rng, st.count_mean, st.count_var)));
    std::vector<std::string> out;
    for (long long k = 0; k < count; ++k) {
        long long len = std::llround(draw_normal(rng, st.length_mean, st.length_var));
        len = std::clamp(len, 1LL, len_text);
        auto start = static_cast<std::size_t>(
            uniform_index(rng, static_cast<std::size_t>(len_text - len + 1)));
        out.push_back(utf8::encode(std::u32string_view(text).substr(start, static_cast<std::size_t>(len))));
    }
    return out;
}
} // namespace detail

/// Expected agreement between two independent random annotators whose
/// highlight counts and lengths follow normal distributions (rounded, clamped
/// to at least 1) and whose highlights are placed uniformly within a text
/// drawn from `texts`.
inline BaselineEstimate iaa_random_baseline(const HighlightStats& stats, std::span<const std::string> texts,
                                            std::uint64_t seed, std::size_t trials, double tau = 0.5) {
    if (stats.count_var < 0.0 || stats.length_var < 0.0) throw ParameterError("variance must be non-negative");
    if (trials == 0) throw ParameterError("trials must be positive");
    std::vector<std::u32string> decoded;
    for (const auto& t : texts) {
        auto d = utf8::decode(t);
        if (!d.empty()) decoded.push_back(std::move(d));
    }
    if (decoded.empty()) throw ParameterError("random baseline needs at least one non-empty text");
    auto rng = make_rng(seed);
    std::vector<double> rs;
    rs.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& text = decoded[uniform_index(rng, decoded.size())];
        auto a = detail::random_annotation(text, stats, rng);
        auto b = detail::random_annotation(text, stats, rng);
        rs.push_back(agreement(a, b, tau).r_overall);
    }
    BaselineEstimate est;
    est.trials = trials;
    for (double r : rs) est.mean += r;
    est.mean /= static_cast<double>(trials);
    if (trials > 1) {
        double ss = 0.0;
        for (double r : rs) ss += (r - est.mean) * (r - est.mean);
        est.sd = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    return est;
}

} // namespace persum::textmetrics
