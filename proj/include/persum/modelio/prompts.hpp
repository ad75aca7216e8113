#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "persum/util/digest.hpp"
#include "persum/util/error.hpp"

namespace persum::modelio {

// Placeholders are written {{name}}. Judge, zero-shot, paraphrase and
// adversarial bodies are reproduced verbatim apart from the placeholders.
namespace prompt_text {

inline constexpr std::string_view kLlmCoverageBody = R"PROMPT(You are an evaluator. Your task is to determine how well a generated summary captures all of the main arguments from a source article. This is a measure of "coverage," which does not necessarily address factual accuracy (faithfulness) but focuses on completeness of content.

The scale for coverage is:
1. No Coverage: The summary does not include any of the main arguments from the article.
2. Low Coverage: The summary includes only a few of the main arguments from the article, omitting most.
3. Medium Coverage: The summary contains around half of the article's main arguments.
4. High Coverage: The summary contains most of the main arguments from the article, missing only a few.
5. Perfect Coverage: The summary includes all major points and arguments mentioned in the article, leaving out nothing important.

Follow these steps carefully:

1. **Read the Source Article**: Examine the text provided in the article. Identify all major points, arguments, or facts it contains.
2. **Read the Summary**: Look at the text in the summary. List each argument or point the summary includes.
3. **Compare for Completeness**:
- Check if each major point from the source article is present in the summary.
- Count how many major points are covered versus how many are omitted.
4. **Determine the Score**:
- Assign a score from 1 (no coverage) to 5 (perfect coverage), based on how many main arguments are included in the summary relative to the source.
5. **Output Instructions**:
- Output only the final numeric score (1, 2, 3, 4, or 5) without any explanation or additional text.

---

# Source Article:

{{article}}

# Generated Summary:

{{summary}}

# Final Coverage Score (1~5 only):)PROMPT";

inline constexpr std::string_view kLlmFaithfulnessBody = R"PROMPT(You are an evaluator. Your task is to analyze how faithfully a generated summary represents the information found in the source article. Faithfulness here means the absence of factual errors---i.e., any claims in the summary must be either directly stated, heavily implied, or logically entailed by the source article.

The scale for faithfulness is:
1. Unfaithful: The summary is almost entirely incorrect or unrelated to the source.
2. Mostly Unfaithful: The summary includes only a few relevant arguments or correct details but is largely incorrect or missing.
3. Neutral: The summary has about half of the important points correct, but also includes notable inaccuracies or omissions.
4. Mostly Faithful: The summary reflects most of the article's arguments accurately, with only minor errors or omissions.
5. Perfectly Faithful: The summary includes all of the article's main arguments accurately and does not introduce any contradictory or unsupported claims.

Follow these steps carefully:

1. **Read the Source Article**: Examine the text provided in the article. Identify the main points, arguments, or facts it contains.
2. **Read the Summary**: Look at the text in the summary. Itemize or note each claim or statement made in the summary.
3. **Compare for Accuracy**:
- Check if each claim in the summary is explicitly or logically supported by the source. 
- Mark any claim that appears to be contradicting the source or not found in the source. 
- Check if the summary omits major arguments that are central to the source.
4. **Determine the Score**: 
- Assign a score from 1 (completely unfaithful) to 5 (perfectly faithful), based on how many claims match (and do not contradict) the source article and whether key points are included.
5. **Output Instructions**:
- Output only the final numeric score (1, 2, 3, 4, or 5) without any additional explanation or text.

---

# Source Article:

{{article}}

# Generated Summary:

{{summary}}

# Final Faithfulness Score (1~5 only):)PROMPT";

inline constexpr std::string_view kZeroShotLeftBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives, summarize only the Left-leaning perspective in one sentence, starting with 'The Left '. ONLY RETURN THE SUMMARY AND NOTHING ELSE.

Left:
{{left_article}}

Right:
{{right_article}})PROMPT";

inline constexpr std::string_view kParaphraseBody = R"PROMPT([TASK]
You are given an article that makes an argument related to the provided topic. An excerpt from the document highlights the main key argument that the author of the article is trying to assert. Please write a concise, short, one-sentence paraphrase (as short as possible) that reflects the argument implied or present in the provided excerpt. **Your paraphrase should begin with "The article argues"**.

---

Topic: {{topic}}

Article: {{article}}

Excerpt: {{excerpt}}

---

One-Line Argument Summary starting with "The article argues":)PROMPT";

inline constexpr std::string_view kAdversarialBody = R"PROMPT([TASK]
You are given one main argument from a political news article (either left-leaning or right-leaning). **Rewrite the argument so that the argument is completely reversed or semantically opposite.** If the original argument supports or praises a policy/idea/group, the reversed version should criticize or oppose it, and vice versa. Only return the reversed argument itself, with no extra commentary or analysis.

[EXAMPLES]
1.
ORIGINAL: The article argues that stricter immigration laws help protect domestic jobs and strengthen national identity.
REVERSED: The article argues that relaxed immigration laws create more job opportunities and enhance cultural diversity.

2.
ORIGINAL: The article insists that climate change is primarily caused by human activity and demands immediate government intervention.
REVERSED: The article insists that human activity has minimal impact on climate change and calls for minimal government involvement.

[INFERENCE]
ORIGINAL: {{key_point}}
REVERSED:)PROMPT";

inline constexpr std::string_view kZeroShotRightBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives, summarize only the Right-leaning perspective in one sentence, starting with 'The Right '. ONLY RETURN THE SUMMARY AND NOTHING ELSE.

Left:
{{left_article}}

Right:
{{right_article}})PROMPT";

inline constexpr std::string_view kSelfRefineCritiqueBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives and a summary of the {{perspective}}-leaning perspective, give feedback on the summary. List any main arguments of the {{perspective}}-leaning texts that the summary omits, and any claims in the summary that the {{perspective}}-leaning texts do not support or that belong to the other perspective. ONLY RETURN THE FEEDBACK AND NOTHING ELSE.

Left:
{{left_article}}

Right:
{{right_article}}

Summary:
{{summary}})PROMPT";

inline constexpr std::string_view kSelfRefineReviseBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives, a summary of the {{perspective}}-leaning perspective, and feedback on that summary, revise the summary to address the feedback. Summarize only the {{perspective}}-leaning perspective in one sentence, starting with 'The {{perspective}} '. ONLY RETURN THE SUMMARY AND NOTHING ELSE.

Left:
{{left_article}}

Right:
{{right_article}}

Summary:
{{summary}}

Feedback:
{{feedback}})PROMPT";

inline constexpr std::string_view kDebateUpdateBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives, summarize only the {{perspective}}-leaning perspective in one sentence, starting with 'The {{perspective}} '. These are the summaries written by other agents:

{{other_summaries}}

Your previous summary:
{{summary}}

Using the other agents' summaries as additional information, give an updated summary. ONLY RETURN THE SUMMARY AND NOTHING ELSE.

Left:
{{left_article}}

Right:
{{right_article}})PROMPT";

inline constexpr std::string_view kDebateAggregateBody = R"PROMPT(Given texts from both Left-leaning and Right-leaning perspectives and several candidate summaries of the {{perspective}}-leaning perspective produced by a debate, write the final summary that best captures only the {{perspective}}-leaning perspective in one sentence, starting with 'The {{perspective}} '. ONLY RETURN THE SUMMARY AND NOTHING ELSE.

Candidate summaries:
{{summaries}}

Left:
{{left_article}}

Right:
{{right_article}})PROMPT";

inline constexpr std::string_view kFuseKeyPointsBody = R"PROMPT(Rewrite the following key points into one fluent paragraph. Keep every key point, do not add any new claim, and do not drop any claim. ONLY RETURN THE PARAGRAPH AND NOTHING ELSE.

Topic: {{topic}}

Key points:
{{key_points}})PROMPT";

} // namespace prompt_text

namespace prompt_id {
inline constexpr std::string_view kLlmCoverage = "llm_coverage";
inline constexpr std::string_view kLlmFaithfulness = "llm_faithfulness";
inline constexpr std::string_view kZeroShotLeft = "zero_shot_left";
inline constexpr std::string_view kZeroShotRight = "zero_shot_right";
inline constexpr std::string_view kParaphrase = "paraphrase_excerpt";
inline constexpr std::string_view kAdversarial = "adversarial_key_point";
inline constexpr std::string_view kSelfRefineCritique = "self_refine_critique";
inline constexpr std::string_view kSelfRefineRevise = "self_refine_revise";
inline constexpr std::string_view kDebateUpdate = "debate_update";
inline constexpr std::string_view kDebateAggregate = "debate_aggregate";
inline constexpr std::string_view kFuseKeyPoints = "fuse_key_points";
} // namespace prompt_id

using Bindings = std::map<std::string, std::string, std::less<>>;

class PromptTemplate {
  public:
    PromptTemplate(std::string id, std::string body) : id_(std::move(id)), body_(std::move(body)) {
        std::size_t pos = 0;
        while ((pos = body_.find("{{", pos)) != std::string::npos) {
            auto end = body_.find("}}", pos + 2);
            if (end == std::string::npos) throw RenderError("template '" + id_ + "': unterminated placeholder");
            required_.insert(body_.substr(pos + 2, end - pos - 2));
            pos = end + 2;
        }
    }

    const std::string& id() const noexcept { return id_; }
    const std::string& body() const noexcept { return body_; }
    const std::set<std::string>& required_placeholders() const noexcept { return required_; }
    std::string digest() const { return sha256_hex(body_); }

    /// Single left-to-right pass; bound values are copied literally, so a
    /// value containing "{{x}}" is never expanded again.
    std::string render(const Bindings& bindings) const {
        for (const auto& name : required_) {
            if (!bindings.contains(name)) throw RenderError("template '" + id_ + "': placeholder '" + name + "' is unbound");
        }
        std::string out;
        out.reserve(body_.size());
        std::size_t pos = 0;
        for (;;) {
            auto open = body_.find("{{", pos);
            if (open == std::string::npos) {
                out.append(body_, pos, std::string::npos);
                return out;
            }
            out.append(body_, pos, open - pos);
            auto close = body_.find("}}", open + 2);
            out.append(bindings.find(std::string_view(body_).substr(open + 2, close - open - 2))->second);
            pos = close + 2;
        }
    }

  private:
    std::string id_;
    std::string body_;
    std::set<std::string> required_;
};

class PromptRegistry {
  public:
    /// Registry preloaded with every template the pipelines use.
    static const PromptRegistry& builtin() {
        static const PromptRegistry reg = [] {
            PromptRegistry r;
            using namespace prompt_text;
            r.add(PromptTemplate(std::string(prompt_id::kLlmCoverage), std::string(kLlmCoverageBody)));
            r.add(PromptTemplate(std::string(prompt_id::kLlmFaithfulness), std::string(kLlmFaithfulnessBody)));
            r.add(PromptTemplate(std::string(prompt_id::kZeroShotLeft), std::string(kZeroShotLeftBody)));
            r.add(PromptTemplate(std::string(prompt_id::kZeroShotRight), std::string(kZeroShotRightBody)));
            r.add(PromptTemplate(std::string(prompt_id::kParaphrase), std::string(kParaphraseBody)));
            r.add(PromptTemplate(std::string(prompt_id::kAdversarial), std::string(kAdversarialBody)));
            r.add(PromptTemplate(std::string(prompt_id::kSelfRefineCritique), std::string(kSelfRefineCritiqueBody)));
            r.add(PromptTemplate(std::string(prompt_id::kSelfRefineRevise), std::string(kSelfRefineReviseBody)));
            r.add(PromptTemplate(std::string(prompt_id::kDebateUpdate), std::string(kDebateUpdateBody)));
            r.add(PromptTemplate(std::string(prompt_id::kDebateAggregate), std::string(kDebateAggregateBody)));
            r.add(PromptTemplate(std::string(prompt_id::kFuseKeyPoints), std::string(kFuseKeyPointsBody)));
            return r;
        }();
        return reg;
    }

    void add(PromptTemplate t) {
        auto id = t.id();
        if (!templates_.emplace(id, std::move(t)).second) throw RenderError("duplicate template id: " + id);
    }

    const PromptTemplate& get(std::string_view id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) throw RenderError("unknown template: " + std::string(id));
        return it->second;
    }

    std::string render(std::string_view id, const Bindings& bindings) const { return get(id).render(bindings); }

    /// template id -> body digest, for run headers.
    std::map<std::string, std::string> digests() const {
        std::map<std::string, std::string> out;
        for (const auto& [id, t] : templates_) out.emplace(id, t.digest());
        return out;
    }

  private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

inline std::string render(std::string_view template_id, const Bindings& bindings) {
    return PromptRegistry::builtin().render(template_id, bindings);
}

} // namespace persum::modelio
