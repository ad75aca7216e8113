#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "persum/corpus/types.hpp"
#include "persum/util/io.hpp"
#include "persum/util/utf8.hpp"

namespace persum::corpus {

namespace ingest_detail {

inline SourceArticle parse_article(const Json& j, const std::string& where) {
    SourceArticle a;
    a.topic = require<std::string>(j, "topic", where);
    a.perspective = require<std::string>(j, "perspective", where);
    if (a.perspective.empty()) throw ParseError(where + ": empty perspective");
    auto docs = require<Json>(j, "documents", where);
    if (!docs.is_array() || docs.empty()) throw ParseError(where + ": 'documents' must be a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto dw = where + ".documents[" + std::to_string(i) + "]";
        Document d{require<std::string>(docs[i], "doc_id", dw), require<std::string>(docs[i], "text", dw)};
        if (!ids.insert(d.doc_id).second) throw IntegrityError(dw + ": duplicate doc_id '" + d.doc_id + "'");
        a.documents.push_back(std::move(d));
    }
    return a;
}

inline std::vector<Excerpt> parse_excerpts(const Json& j, const SourceArticle& a, const std::string& where) {
    std::vector<Excerpt> out;
    if (!j.contains("excerpts")) return out;
    const auto& arr = j.at("excerpts");
    if (!arr.is_array()) throw ParseError(where + ": 'excerpts' must be an array");
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        auto ew = where + ".excerpts[" + std::to_string(i) + "]";
        Excerpt e;
        e.doc_id = require<std::string>(arr[i], "doc_id", ew);
        auto start = require<long long>(arr[i], "start", ew);
        auto end = require<long long>(arr[i], "end", ew);
        e.text = require<std::string>(arr[i], "text", ew);
        e.annotator_id = optional_field<std::string>(arr[i], "annotator_id", "");
        const Document* doc = a.find(e.doc_id);
        if (!doc) throw IntegrityError(ew + ": unknown doc_id '" + e.doc_id + "'");
        auto len = static_cast<long long>(utf8::length(doc->text));
        if (start < 0 || start >= end || end > len) {
            throw IntegrityError(ew + ": span [" + std::to_string(start) + ", " + std::to_string(end) +
                                 ") is outside the document (length " + std::to_string(len) + ")");
        }
        e.start = static_cast<std::size_t>(start);
        e.end = static_cast<std::size_t>(end);
        if (utf8::substr(doc->text, e.start, e.end) != e.text) {
            throw IntegrityError(ew + ": excerpt text does not equal the document substring at its span");
        }
        if (!seen.emplace(e.doc_id, e.annotator_id).second) {
            throw IntegrityError(ew + ": annotator '" + e.annotator_id + "' has more than one excerpt in document '" +
                                 e.doc_id + "'");
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const Excerpt& x, const Excerpt& y) {
        return std::tie(x.doc_id, x.annotator_id) < std::tie(y.doc_id, y.annotator_id);
    });
    return out;
}

inline std::optional<KeyPointSet> parse_key_points(const Json& j, const SourceArticle& a, const std::string& where) {
    if (!j.contains("key_points")) return std::nullopt;
    const auto& kj = j.at("key_points");
    KeyPointSet ks;
    auto parse_list = [&](const char* field, const char* source_field, std::vector<KeyPoint>& dst) {
        if (!kj.contains(field)) return;
        const auto& arr = kj.at(field);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto kw = where + ".key_points." + field + "[" + std::to_string(i) + "]";
            KeyPoint k;
            k.kp_id = require<std::string>(arr[i], "kp_id", kw);
            k.text = require<std::string>(arr[i], "text", kw);
            k.source = require<std::string>(arr[i], source_field, kw);
            dst.push_back(std::move(k));
        }
    };
    parse_list("relevant", "doc_id", ks.relevant);
    parse_list("adversarial", "source_kp_id", ks.adversarial);
    for (const auto& k : ks.relevant) {
        if (!a.find(k.source)) throw IntegrityError(where + ": key point " + k.kp_id + " names unknown doc_id " + k.source);
    }
    ks.validate();
    return ks;
}

} // namespace ingest_detail

/// Parses an annotation document: one article object, an array of them, or
/// {"articles": [...]}. Every excerpt is re-validated against its document.
/// Output is ordered by (topic, perspective); excerpts by (doc_id, annotator).
inline std::vector<AnnotatedArticle> ingest_annotations(const Json& doc) {
    std::vector<Json> items;
    if (doc.is_array()) {
        items.assign(doc.begin(), doc.end());
    } else if (doc.is_object() && doc.contains("articles")) {
        items.assign(doc.at("articles").begin(), doc.at("articles").end());
    } else if (doc.is_object()) {
        items.push_back(doc);
    } else {
        throw ParseError("annotation document must be an object or an array");
    }
    std::vector<AnnotatedArticle> out;
    std::set<std::pair<std::string, std::string>> keys;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto where = "articles[" + std::to_string(i) + "]";
        AnnotatedArticle aa;
        aa.article = ingest_detail::parse_article(items[i], where);
        if (!keys.emplace(aa.article.topic, aa.article.perspective).second) {
            throw IntegrityError(where + ": duplicate article (" + aa.article.topic + ", " + aa.article.perspective + ")");
        }
        aa.excerpts = ingest_detail::parse_excerpts(items[i], aa.article, where);
        aa.key_points = ingest_detail::parse_key_points(items[i], aa.article, where);
        out.push_back(std::move(aa));
    }
    std::sort(out.begin(), out.end(), [](const AnnotatedArticle& x, const AnnotatedArticle& y) {
        return std::tie(x.article.topic, x.article.perspective) < std::tie(y.article.topic, y.article.perspective);
    });
    return out;
}

inline std::vector<AnnotatedArticle> ingest_annotations_file(const std::filesystem::path& path) {
    return ingest_annotations(read_json(path));
}

/// Serializes back to the annotation schema (excerpts and key points).
inline Json to_json(const AnnotatedArticle& aa) {
    Json docs = Json::array();
    for (const auto& d : aa.article.documents) docs.push_back({{"doc_id", d.doc_id}, {"text", d.text}});
    Json ex = Json::array();
    for (const auto& e : aa.excerpts) {
        ex.push_back({{"doc_id", e.doc_id}, {"start", e.start}, {"end", e.end}, {"text", e.text}, {"annotator_id", e.annotator_id}});
    }
    Json j{{"topic", aa.article.topic}, {"perspective", aa.article.perspective}, {"documents", docs}, {"excerpts", ex}};
    if (aa.key_points) {
        Json rel = Json::array(), adv = Json::array();
        for (const auto& k : aa.key_points->relevant) rel.push_back({{"kp_id", k.kp_id}, {"text", k.text}, {"doc_id", k.source}});
        for (const auto& k : aa.key_points->adversarial) adv.push_back({{"kp_id", k.kp_id}, {"text", k.text}, {"source_kp_id", k.source}});
        j["key_points"] = {{"relevant", rel}, {"adversarial", adv}};
    }
    return j;
}

/// One excerpt per document: where several annotators marked the same
/// document, the lexicographically first annotator's excerpt is used.
inline std::vector<Excerpt> primary_excerpts(const AnnotatedArticle& aa) {
    std::vector<Excerpt> out;
    std::set<std::string> docs;
    for (const auto& e : aa.excerpts) {
        if (docs.insert(e.doc_id).second) out.push_back(e);
    }
    return out;
}

} // namespace persum::corpus
