#pragma once

#include <string>
#include <vector>

#include "persum/corpus/types.hpp"
#include "persum/modelio/client.hpp"
#include "persum/modelio/prompts.hpp"
#include "persum/util/log.hpp"

namespace persum::corpus {

inline constexpr std::string_view kKeyPointPrefix = "The article argues";

struct ModelContext {
    modelio::ModelClient& client;
    const modelio::ModelEndpoint& endpoint;
    int max_attempts = 3; // format retries, on top of transport retries
};

namespace kp_detail {
inline std::string trim(std::string s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace kp_detail

/// Rewrites each excerpt into a one-sentence key point. Replies that do not
/// start with "The article argues" are re-sampled; after max_attempts the
/// last reply is kept but flagged for manual review.
inline std::vector<KeyPoint> paraphrase_excerpts(const SourceArticle& article, const std::vector<Excerpt>& excerpts,
                                                 const ModelContext& ctx) {
    std::vector<KeyPoint> out;
    for (const auto& e : excerpts) {
        const Document* doc = article.find(e.doc_id);
        if (!doc) throw IntegrityError("excerpt names unknown doc_id " + e.doc_id);
        auto prompt = modelio::render(modelio::prompt_id::kParaphrase,
                                      {{"topic", article.topic}, {"article", doc->text}, {"excerpt", e.text}});
        KeyPoint k;
        k.kp_id = article.topic + "/" + article.perspective + "/" + e.doc_id;
        k.source = e.doc_id;
        for (int attempt = 0; attempt < ctx.max_attempts; ++attempt) {
            k.text = kp_detail::trim(ctx.client.complete(ctx.endpoint, prompt, static_cast<std::uint32_t>(attempt)));
            k.flagged = !k.text.starts_with(kKeyPointPrefix);
            if (!k.flagged) break;
        }
        if (k.flagged) {
            k.flag_reason = "reply does not start with \"The article argues\"";
            log_warning("key point " + k.kp_id + " flagged: " + k.flag_reason);
        }
        out.push_back(std::move(k));
    }
    return out;
}

/// One reversed key point per input, linked through `source`. Empty or
/// unchanged replies are re-sampled, then flagged.
inline std::vector<KeyPoint> generate_adversarial(const std::vector<KeyPoint>& key_points, const ModelContext& ctx) {
    std::vector<KeyPoint> out;
    for (const auto& src : key_points) {
        auto prompt = modelio::render(modelio::prompt_id::kAdversarial, {{"key_point", src.text}});
        KeyPoint k;
        k.kp_id = src.kp_id + "#adv";
        k.source = src.kp_id;
        for (int attempt = 0; attempt < ctx.max_attempts; ++attempt) {
            k.text = kp_detail::trim(ctx.client.complete(ctx.endpoint, prompt, static_cast<std::uint32_t>(attempt)));
            k.flagged = k.text.empty() || k.text == kp_detail::trim(src.text);
            if (!k.flagged) break;
        }
        if (k.flagged) {
            k.flag_reason = k.text.empty() ? "empty reversal" : "reversal identical to source";
            log_warning("adversarial key point " + k.kp_id + " flagged: " + k.flag_reason);
        }
        out.push_back(std::move(k));
    }
    return out;
}

} // namespace persum::corpus
