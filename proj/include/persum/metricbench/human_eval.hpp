#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "persum/util/error.hpp"
#include "persum/util/io.hpp"

namespace persum::metricbench {

struct AnnotatedKeyPoint {
    std::string id;
    std::string text;
};

/// Links a summary key point to the document key point it expresses, or to
/// none when the summary point has no counterpart in the document.
struct InclusionMark {
    std::string summary_kp;
    std::optional<std::string> doc_kp;
};

struct HumanEvalRecord {
    std::string instance_id;
    std::string method;
    std::vector<AnnotatedKeyPoint> doc_keypoints;
    std::vector<AnnotatedKeyPoint> summary_keypoints;
    std::vector<InclusionMark> marks;

    void validate() const {
        std::set<std::string> doc_ids, sum_ids;
        for (const auto& k : doc_keypoints)
            if (!doc_ids.insert(k.id).second) throw IntegrityError(instance_id + ": duplicate document key point " + k.id);
        for (const auto& k : summary_keypoints)
            if (!sum_ids.insert(k.id).second) throw IntegrityError(instance_id + ": duplicate summary key point " + k.id);
        for (const auto& m : marks) {
            if (!sum_ids.contains(m.summary_kp)) throw IntegrityError(instance_id + ": mark names unknown summary key point " + m.summary_kp);
            if (m.doc_kp && !doc_ids.contains(*m.doc_kp)) throw IntegrityError(instance_id + ": mark names unknown document key point " + *m.doc_kp);
        }
    }

    /// Document key points matched by at least one mark.
    std::set<std::string> included_doc() const {
        std::set<std::string> s;
        for (const auto& m : marks)
            if (m.doc_kp) s.insert(*m.doc_kp);
        return s;
    }
    /// Summary key points linked to some document key point.
    std::set<std::string> supported_summary() const {
        std::set<std::string> s;
        for (const auto& m : marks)
            if (m.doc_kp) s.insert(m.summary_kp);
        return s;
    }
};

inline HumanEvalRecord human_record_from_json(const Json& j) {
    const std::string where = "human-eval record";
    HumanEvalRecord r;
    r.instance_id = require<std::string>(j, "instance_id", where);
    r.method = optional_field<std::string>(j, "method", "");
    for (const auto& k : require<Json>(j, "doc_keypoints", where))
        r.doc_keypoints.push_back({require<std::string>(k, "id", where), optional_field<std::string>(k, "text", "")});
    for (const auto& k : require<Json>(j, "summary_keypoints", where))
        r.summary_keypoints.push_back({require<std::string>(k, "id", where), optional_field<std::string>(k, "text", "")});
    if (j.contains("inclusion")) {
        for (const auto& m : j.at("inclusion")) {
            InclusionMark mk;
            mk.summary_kp = require<std::string>(m, "summary_kp", where);
            if (m.contains("doc_kp") && !m.at("doc_kp").is_null()) mk.doc_kp = m.at("doc_kp").get<std::string>();
            r.marks.push_back(std::move(mk));
        }
    }
    r.validate();
    return r;
}

struct HumanScores {
    double coverage = 0.0;
    double faithfulness = 0.0;
};

/// coverage = included document key points / all document key points;
/// faithfulness = supported summary key points / all summary key points.
inline HumanScores human_scores(const HumanEvalRecord& r) {
    r.validate();
    if (r.doc_keypoints.empty()) throw UndefinedMetricError(r.instance_id + ": no document key points, coverage undefined");
    if (r.summary_keypoints.empty()) throw UndefinedMetricError(r.instance_id + ": no summary key points, faithfulness undefined");
    return {static_cast<double>(r.included_doc().size()) / static_cast<double>(r.doc_keypoints.size()),
            static_cast<double>(r.supported_summary().size()) / static_cast<double>(r.summary_keypoints.size())};
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation; 0 for a single value
};

inline MeanSd mean_sd(const std::vector<double>& v) {
    if (v.empty()) throw ParameterError("mean of empty sample");
    MeanSd m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

struct InclusionStats {
    MeanSd included;     // |K_D ∩ K_S|
    MeanSd omitted;      // |K_D \ K_S|
    MeanSd hallucinated; // |K_S \ K_D|
    std::size_t n = 0;
};

/// Per-method key point inclusion counts, keyed by record.method.
inline std::map<std::string, InclusionStats> keypoint_inclusion_stats(const std::vector<HumanEvalRecord>& records) {
    std::map<std::string, std::vector<double>> inc, om, hal;
    for (const auto& r : records) {
        r.validate();
        auto included = static_cast<double>(r.included_doc().size());
        inc[r.method].push_back(included);
        om[r.method].push_back(static_cast<double>(r.doc_keypoints.size()) - included);
        hal[r.method].push_back(static_cast<double>(r.summary_keypoints.size() - r.supported_summary().size()));
    }
    std::map<std::string, InclusionStats> out;
    for (const auto& [method, v] : inc) {
        out[method] = {mean_sd(v), mean_sd(om[method]), mean_sd(hal[method]), v.size()};
    }
    return out;
}

} // namespace persum::metricbench
