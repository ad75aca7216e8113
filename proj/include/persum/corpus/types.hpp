#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "persum/util/error.hpp"

namespace persum::corpus {

/// Exact ground-truth score.
using Ratio = boost::rational<std::int64_t>;

inline std::string to_string(const Ratio& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Ratio parse_ratio(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Ratio(std::stoll(s));
        return Ratio(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ParseError("not a rational number: '" + s + "'");
    }
}

inline double to_double(const Ratio& r) { return boost::rational_cast<double>(r); }

// Perspective labels are free strings; "Left" and "Right" are the two the
// built-in prompts know about.
inline constexpr const char* kLeft = "Left";
inline constexpr const char* kRight = "Right";

inline std::optional<std::string> opposite_perspective(const std::string& p) {
    if (p == kLeft) return std::string(kRight);
    if (p == kRight) return std::string(kLeft);
    return std::nullopt;
}

struct Document {
    std::string doc_id;
    std::string text;
};

/// All documents for one topic written from one perspective.
struct SourceArticle {
    std::string topic;
    std::string perspective;
    std::vector<Document> documents;

    /// Documents joined by blank lines, as passed to prompts.
    std::string text() const {
        std::string out;
        for (const auto& d : documents) {
            if (!out.empty()) out += "\n\n";
            out += d.text;
        }
        return out;
    }

    const Document* find(const std::string& doc_id) const {
        for (const auto& d : documents) {
            if (d.doc_id == doc_id) return &d;
        }
        return nullptr;
    }
};

/// Highlighted span [start, end) in code points of one document's text.
struct Excerpt {
    std::string doc_id;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;
    std::string annotator_id;
};

struct KeyPoint {
    std::string kp_id;
    std::string text;
    std::string source;     // doc_id for relevant points, source kp_id for derived ones
    bool flagged = false;   // failed a format or sanity check; needs manual review
    std::string flag_reason;
};

struct KeyPointSet {
    std::vector<KeyPoint> relevant;
    std::vector<KeyPoint> adversarial; // reversals of relevant points
    std::vector<KeyPoint> opposite;    // relevant points of the opposing perspective

    void validate() const {
        if (adversarial.size() > relevant.size()) throw IntegrityError("more adversarial than relevant key points");
        std::set<std::string> ids, relevant_ids;
        auto add = [&ids](const KeyPoint& k) {
            if (!ids.insert(k.kp_id).second) throw IntegrityError("duplicate key point id: " + k.kp_id);
        };
        for (const auto& k : relevant) {
            add(k);
            relevant_ids.insert(k.kp_id);
        }
        std::set<std::string> reversed;
        for (const auto& k : adversarial) {
            add(k);
            if (!relevant_ids.contains(k.source)) {
                throw IntegrityError("adversarial key point " + k.kp_id + " does not link to a relevant key point");
            }
            if (!reversed.insert(k.source).second) {
                throw IntegrityError("relevant key point " + k.source + " has more than one adversarial variant");
            }
        }
        for (const auto& k : opposite) add(k);
    }
};

struct AnnotatedArticle {
    SourceArticle article;
    std::vector<Excerpt> excerpts;
    std::optional<KeyPointSet> key_points;
};

enum class ComposeMode { Concat, Fuse };

inline const char* to_string(ComposeMode m) { return m == ComposeMode::Concat ? "concat" : "fuse"; }

inline ComposeMode parse_compose_mode(const std::string& s) {
    if (s == "concat") return ComposeMode::Concat;
    if (s == "fuse") return ComposeMode::Fuse;
    throw ParseError("unknown composition mode: " + s);
}

struct SummaryComposition {
    std::vector<std::string> included_relevant;
    std::vector<std::string> included_bad;
    std::vector<std::string> order; // permutation of the union
    ComposeMode mode = ComposeMode::Concat;

    std::size_t k_g() const noexcept { return included_relevant.size(); }
    std::size_t k_b() const noexcept { return included_bad.size(); }
};

struct SyntheticInstance {
    std::string instance_id;
    std::string topic;
    std::string perspective;
    SummaryComposition composition;
    std::string summary_text;
    std::size_t total_relevant = 0;
    Ratio coverage;
    Ratio faithfulness;
    bool verified = true;
};

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

} // namespace persum::corpus
