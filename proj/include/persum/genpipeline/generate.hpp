#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "persum/corpus/types.hpp"
#include "persum/modelio/client.hpp"
#include "persum/modelio/prompts.hpp"
#include "persum/util/io.hpp"

namespace persum::genpipeline {

using corpus::SourceArticle;

/// Left and right articles on one topic.
struct ArticlePair {
    std::string pair_id;
    std::string topic;
    SourceArticle left;
    SourceArticle right;

    void validate() const {
        if (pair_id.empty()) throw ParseError("article pair without pair_id");
        if (left.topic != topic || right.topic != topic)
            throw IntegrityError("article pair '" + pair_id + "': articles do not share the topic");
        if (left.perspective != corpus::kLeft || right.perspective != corpus::kRight)
            throw IntegrityError("article pair '" + pair_id + "': expected one Left and one Right article");
        if (left.documents.empty() || right.documents.empty())
            throw IntegrityError("article pair '" + pair_id + "': an article has no documents");
    }

    const SourceArticle& side(const std::string& perspective) const {
        if (perspective == corpus::kLeft) return left;
        if (perspective == corpus::kRight) return right;
        throw ParameterError("unknown perspective: " + perspective);
    }
};

namespace gen_detail {
inline SourceArticle article_from_json(const Json& j, const std::string& topic, const char* perspective,
                                       const std::string& where) {
    SourceArticle a;
    a.topic = topic;
    a.perspective = perspective;
    for (const auto& d : j.at("documents")) {
        a.documents.push_back({require<std::string>(d, "doc_id", where), require<std::string>(d, "text", where)});
    }
    return a;
}
} // namespace gen_detail

/// {"pair_id", "topic", "left": {"documents": [{"doc_id","text"}]}, "right": {...}}
inline ArticlePair article_pair_from_json(const Json& j) {
    ArticlePair p;
    p.pair_id = require<std::string>(j, "pair_id", "article pair");
    p.topic = require<std::string>(j, "topic", "article pair " + p.pair_id);
    if (!j.contains("left") || !j.contains("right")) throw ParseError("article pair '" + p.pair_id + "' needs left and right");
    p.left = gen_detail::article_from_json(j.at("left"), p.topic, corpus::kLeft, "article pair " + p.pair_id);
    p.right = gen_detail::article_from_json(j.at("right"), p.topic, corpus::kRight, "article pair " + p.pair_id);
    p.validate();
    return p;
}

inline std::vector<ArticlePair> article_pairs_from_json(const Json& j) {
    const Json& arr = j.is_object() && j.contains("pairs") ? j.at("pairs") : j;
    if (!arr.is_array()) throw ParseError("expected an array of article pairs");
    std::vector<ArticlePair> out;
    for (const auto& p : arr) out.push_back(article_pair_from_json(p));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].pair_id == out[i - 1].pair_id) throw IntegrityError("duplicate pair_id: " + out[i].pair_id);
    return out;
}

struct GenerationTask {
    ArticlePair pair;
    std::string target = corpus::kLeft;
    std::uint64_t seed = 0;

    std::string input_id() const { return pair.pair_id + "/" + target; }
    const SourceArticle& target_article() const { return pair.side(target); }
};

struct Message {
    std::string role; // draft, critique, revise, agent<i>.round<r>, aggregate
    std::string prompt_id;
    std::uint32_t sample_index = 0;
    std::string content;
};

inline Json to_json(const Message& m) {
    return {{"role", m.role}, {"prompt_id", m.prompt_id}, {"sample_index", m.sample_index}, {"content", m.content}};
}

struct GenerationResult {
    std::string summary;
    bool flagged = false;
    std::string flag_reason;
    std::vector<Message> transcript;
    std::size_t calls = 0;
};

inline Json to_json(const GenerationResult& r) {
    Json t = Json::array();
    for (const auto& m : r.transcript) t.push_back(to_json(m));
    return {{"summary", r.summary}, {"flagged", r.flagged}, {"flag_reason", r.flag_reason}, {"calls", r.calls}, {"transcript", t}};
}

/// A generation step failed; the transcript up to the failure is kept.
class GenerationAborted : public TransportError {
  public:
    GenerationAborted(const std::string& what, std::vector<Message> partial)
        : TransportError(what), transcript_(std::move(partial)) {}
    const std::vector<Message>& transcript() const noexcept { return transcript_; }

  private:
    std::vector<Message> transcript_;
};

struct GenContext {
    modelio::ModelClient& client;
    const modelio::ModelEndpoint& endpoint;
    int max_attempts = 3;
};

namespace gen_detail {

inline std::string trim(std::string_view s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

inline std::string required_prefix(const std::string& target) { return "The " + target + " "; }

/// Retries are spaced far apart in sample-index space so they never collide
/// with the indices of sibling candidates.
inline std::uint32_t retry_index(std::uint32_t base, int attempt) {
    return base + static_cast<std::uint32_t>(attempt) * 0x100000u;
}

inline modelio::Bindings article_bindings(const GenerationTask& task) {
    return {{"left_article", task.pair.left.text()},
            {"right_article", task.pair.right.text()},
            {"perspective", task.target}};
}

inline std::string call(GenContext& ctx, std::string_view prompt_id, const modelio::Bindings& b, std::uint32_t sample_index,
                        const std::string& role, GenerationResult& r) {
    auto prompt = modelio::PromptRegistry::builtin().get(prompt_id).render(b);
    std::string reply;
    try {
        reply = trim(ctx.client.complete(ctx.endpoint, prompt, sample_index));
    } catch (const TransportError& e) {
        throw GenerationAborted(role + ": " + e.what(), r.transcript);
    }
    ++r.calls;
    r.transcript.push_back({role, std::string(prompt_id), sample_index, reply});
    return reply;
}

inline void check_prefix(GenerationResult& r, const std::string& target) {
    if (!r.summary.starts_with(required_prefix(target))) {
        r.flagged = true;
        r.flag_reason = "summary does not start with '" + required_prefix(target) + "'";
    }
}

} // namespace gen_detail

inline std::string_view zero_shot_prompt_id(const std::string& target) {
    if (target == corpus::kLeft) return modelio::prompt_id::kZeroShotLeft;
    if (target == corpus::kRight) return modelio::prompt_id::kZeroShotRight;
    throw ParameterError("unknown perspective: " + target);
}

inline std::string zero_shot_prompt(const GenerationTask& task) {
    return modelio::PromptRegistry::builtin().get(zero_shot_prompt_id(task.target)).render(gen_detail::article_bindings(task));
}

/// One-sentence summary of the target perspective. A reply without the
/// required "The Left "/"The Right " opening is retried; if every attempt
/// misses, the last reply is returned flagged.
inline GenerationResult zero_shot(const GenerationTask& task, GenContext& ctx, std::uint32_t sample_index = 0) {
    task.pair.validate();
    GenerationResult r;
    auto id = zero_shot_prompt_id(task.target);
    auto bindings = gen_detail::article_bindings(task);
    for (int attempt = 0; attempt < std::max(1, ctx.max_attempts); ++attempt) {
        r.summary = gen_detail::call(ctx, id, bindings, gen_detail::retry_index(sample_index, attempt), "draft", r);
        if (r.summary.starts_with(gen_detail::required_prefix(task.target))) return r;
    }
    gen_detail::check_prefix(r, task.target);
    return r;
}

/// Draft, then `iterations` rounds of critique and revision.
inline GenerationResult self_refine(const GenerationTask& task, GenContext& ctx, std::size_t iterations = 3) {
    if (iterations < 1) throw ParameterError("self_refine needs at least one iteration");
    task.pair.validate();
    GenerationResult r;
    auto bindings = gen_detail::article_bindings(task);
    r.summary = gen_detail::call(ctx, zero_shot_prompt_id(task.target), bindings, 0, "draft", r);
    for (std::size_t i = 1; i <= iterations; ++i) {
        auto idx = static_cast<std::uint32_t>(i);
        bindings["summary"] = r.summary;
        auto feedback = gen_detail::call(ctx, modelio::prompt_id::kSelfRefineCritique, bindings, idx, "critique", r);
        bindings["feedback"] = feedback;
        r.summary = gen_detail::call(ctx, modelio::prompt_id::kSelfRefineRevise, bindings, idx, "revise", r);
        bindings.erase("feedback");
    }
    gen_detail::check_prefix(r, task.target);
    return r;
}

/// `agents` independent drafts, then `rounds` synchronous rounds in which
/// every agent reads the others' latest drafts and updates its own, then one
/// aggregator call over the final drafts.
inline GenerationResult debate(const GenerationTask& task, GenContext& ctx, std::size_t agents = 3, std::size_t rounds = 3) {
    if (agents < 2) throw ParameterError("debate needs at least two agents");
    if (rounds < 1) throw ParameterError("debate needs at least one round");
    task.pair.validate();
    GenerationResult r;
    auto bindings = gen_detail::article_bindings(task);
    auto label = [](std::size_t a, std::size_t round) {
        return "agent" + std::to_string(a + 1) + ".round" + std::to_string(round);
    };
    std::vector<std::string> drafts(agents);
    for (std::size_t a = 0; a < agents; ++a) {
        drafts[a] = gen_detail::call(ctx, zero_shot_prompt_id(task.target), bindings, static_cast<std::uint32_t>(a),
                                     label(a, 0), r);
    }
    for (std::size_t round = 1; round <= rounds; ++round) {
        std::vector<std::string> next(agents);
        for (std::size_t a = 0; a < agents; ++a) {
            std::string others;
            for (std::size_t b = 0; b < agents; ++b) {
                if (b == a) continue;
                others += "Agent " + std::to_string(b + 1) + ": " + drafts[b] + "\n";
            }
            bindings["other_summaries"] = gen_detail::trim(others);
            bindings["summary"] = drafts[a];
            next[a] = gen_detail::call(ctx, modelio::prompt_id::kDebateUpdate, bindings,
                                       static_cast<std::uint32_t>(round * agents + a), label(a, round), r);
        }
        drafts = std::move(next);
    }
    bindings.erase("other_summaries");
    bindings.erase("summary");
    std::string all;
    for (std::size_t a = 0; a < agents; ++a) all += std::to_string(a + 1) + ". " + drafts[a] + "\n";
    bindings["summaries"] = gen_detail::trim(all);
    r.summary = gen_detail::call(ctx, modelio::prompt_id::kDebateAggregate, bindings, 0, "aggregate", r);
    gen_detail::check_prefix(r, task.target);
    return r;
}

} // namespace persum::genpipeline
