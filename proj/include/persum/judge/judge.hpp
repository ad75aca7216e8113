#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "persum/modelio/client.hpp"
#include "persum/modelio/endpoint.hpp"
#include "persum/modelio/prompts.hpp"
#include "persum/modelio/scorer.hpp"
#include "persum/textmetrics/rouge.hpp"
#include "persum/util/digest.hpp"
#include "persum/util/log.hpp"
#include "persum/util/parallel.hpp"

namespace persum::judge {

struct Provenance {
    std::string endpoint;
    std::string prompt_digest; // template body digest, empty for non-prompt scorers
    int attempts = 0;
    double temperature = 0.0;

    std::string digest() const {
        return Sha256Builder{}.add(endpoint).add(prompt_digest).add(std::to_string(attempts)).add(std::to_string(temperature)).hex();
    }
};

struct JudgeScore {
    std::string metric_id;
    double raw = 0.0;
    bool likert = false; // raw is an integer 1..5
    double normalized = 0.0;
    Provenance provenance;
};

/// 1..5 maps to (raw-1)/4; [0,1] scores pass through.
inline double normalize_likert(int raw) {
    if (raw < 1 || raw > 5) throw ScoringError("Likert score out of range: " + std::to_string(raw));
    return (raw - 1) / 4.0;
}

/// The last number in the reply, accepted only if it is one of 1..5.
/// Decimals, negatives and other integers are rejected.
inline std::optional<int> parse_likert(std::string_view reply) {
    static const std::regex number(R"(-?\d+(?:\.\d+)?)");
    std::string s(reply);
    std::string last;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
        last = it->str();
    }
    if (last.size() != 1 || last[0] < '1' || last[0] > '5') return std::nullopt;
    return last[0] - '0';
}

struct JudgeOptions {
    int max_attempts = 3;
    double temperature = 0.0;
};

namespace detail {
inline JudgeScore llm_judge(std::string_view metric_id, std::string_view template_id, const std::string& article,
                            const std::string& summary, modelio::ModelClient& client,
                            const modelio::ModelEndpoint& endpoint, const JudgeOptions& opt) {
    if (article.empty() || summary.empty()) throw ParameterError("judge needs a non-empty article and summary");
    const auto& tpl = modelio::PromptRegistry::builtin().get(template_id);
    auto prompt = tpl.render({{"article", article}, {"summary", summary}});
    auto ep = endpoint.with_temperature(opt.temperature);
    std::string last_reply;
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        last_reply = client.complete(ep, prompt, static_cast<std::uint32_t>(attempt));
        if (auto raw = parse_likert(last_reply)) {
            JudgeScore s;
            s.metric_id = std::string(metric_id);
            s.raw = *raw;
            s.likert = true;
            s.normalized = normalize_likert(*raw);
            s.provenance = {endpoint.name, tpl.digest(), attempt + 1, opt.temperature};
            return s;
        }
    }
    throw ScoringError(std::string(metric_id) + ": no score in 1..5 after " + std::to_string(opt.max_attempts) +
                       " attempts; last reply: " + last_reply.substr(0, 200));
}
} // namespace detail

inline JudgeScore llm_coverage(const std::string& article, const std::string& summary, modelio::ModelClient& client,
                               const modelio::ModelEndpoint& endpoint, const JudgeOptions& opt = {}) {
    return detail::llm_judge("llm_coverage", modelio::prompt_id::kLlmCoverage, article, summary, client, endpoint, opt);
}

inline JudgeScore llm_faithfulness(const std::string& article, const std::string& summary, modelio::ModelClient& client,
                                   const modelio::ModelEndpoint& endpoint, const JudgeOptions& opt = {}) {
    return detail::llm_judge("llm_faithfulness", modelio::prompt_id::kLlmFaithfulness, article, summary, client, endpoint,
                             opt);
}

enum class ScorerKind { LlmCoverage, LlmFaithfulness, External, NativeRougeProxy, NativeRouge };

/// One column of a score matrix. `endpoint` names a model endpoint (LLM
/// kinds) or a scorer endpoint (external). NativeRouge takes `variant` such
/// as "rouge_l_r" or "rouge_1_p".
struct ScorerSpec {
    std::string metric_id;
    ScorerKind kind = ScorerKind::LlmCoverage;
    std::string endpoint;
    std::string variant;
};

inline ScorerKind parse_scorer_kind(const std::string& s) {
    if (s == "llm_coverage") return ScorerKind::LlmCoverage;
    if (s == "llm_faithfulness") return ScorerKind::LlmFaithfulness;
    if (s == "external") return ScorerKind::External;
    if (s == "native_rouge_proxy") return ScorerKind::NativeRougeProxy;
    if (s == "native_rouge") return ScorerKind::NativeRouge;
    throw ConfigError("unknown scorer kind: " + s);
}

inline ScorerSpec scorer_spec_from_json(const Json& j) {
    ScorerSpec s;
    s.kind = parse_scorer_kind(require<std::string>(j, "kind", "scorer spec"));
    s.metric_id = optional_field<std::string>(j, "metric_id", require<std::string>(j, "kind", "scorer spec"));
    s.endpoint = optional_field<std::string>(j, "endpoint", "");
    s.variant = optional_field<std::string>(j, "variant", "");
    bool needs_endpoint = s.kind == ScorerKind::LlmCoverage || s.kind == ScorerKind::LlmFaithfulness || s.kind == ScorerKind::External;
    if (needs_endpoint && s.endpoint.empty()) throw ConfigError("scorer spec '" + s.metric_id + "' needs an endpoint");
    if (!needs_endpoint && !s.endpoint.empty()) throw ConfigError("scorer spec '" + s.metric_id + "' takes no endpoint");
    if (s.kind == ScorerKind::NativeRouge && s.variant.empty()) throw ConfigError("native_rouge needs a variant");
    return s;
}

/// Native ROUGE variant score of `summary` against `reference`.
inline double native_rouge(const std::string& variant, const std::string& summary, const std::string& reference) {
    using namespace textmetrics;
    auto cand = tokenize(summary), ref = tokenize(reference);
    auto us = variant.rfind('_');
    if (!variant.starts_with("rouge_") || us == std::string::npos || us < 7) throw ConfigError("bad ROUGE variant: " + variant);
    auto order = variant.substr(6, us - 6);
    auto field = variant.substr(us + 1);
    PrfScore s = order == "l" ? rouge_l(cand, ref) : rouge_n(cand, ref, std::stoul(order));
    if (field == "p") return s.precision;
    if (field == "r") return s.recall;
    if (field == "f") return s.f1;
    throw ConfigError("bad ROUGE variant: " + variant);
}

/// What gets scored: a summary against its source article text.
struct ScoringItem {
    std::string instance_id;
    std::string article;
    std::string summary;
};

struct ScoreCell {
    std::optional<JudgeScore> score;
    std::string error;
};

struct ScoreMatrix {
    std::vector<std::string> instance_ids; // sorted
    std::vector<std::string> metric_ids;   // spec order
    std::vector<std::vector<ScoreCell>> cells; // [instance][metric]

    std::size_t unscored() const {
        std::size_t n = 0;
        for (const auto& row : cells)
            for (const auto& c : row) n += c.score ? 0 : 1;
        return n;
    }
};

struct ScoringResources {
    modelio::ModelClient* client = nullptr;
    const modelio::EndpointRegistry* endpoints = nullptr;
};

struct BatchOptions {
    std::size_t jobs = 1;
    double max_unscored_fraction = 0.1;
    JudgeOptions judge;
};

inline JudgeScore score_one(const ScorerSpec& spec, const ScoringItem& item, const ScoringResources& res,
                            const BatchOptions& opt, modelio::ExternalScorer* external) {
    switch (spec.kind) {
    case ScorerKind::LlmCoverage:
    case ScorerKind::LlmFaithfulness: {
        if (!res.client || !res.endpoints) throw ConfigError("LLM scorers need a model client");
        const auto& ep = res.endpoints->model(spec.endpoint);
        auto s = spec.kind == ScorerKind::LlmCoverage ? llm_coverage(item.article, item.summary, *res.client, ep, opt.judge)
                                                      : llm_faithfulness(item.article, item.summary, *res.client, ep, opt.judge);
        s.metric_id = spec.metric_id;
        return s;
    }
    case ScorerKind::External: {
        JudgeScore s;
        s.metric_id = spec.metric_id;
        s.raw = modelio::external_score(*external, item.article, item.summary, spec.endpoint);
        s.normalized = s.raw;
        s.provenance = {spec.endpoint, "", 1, 0.0};
        return s;
    }
    case ScorerKind::NativeRougeProxy:
    case ScorerKind::NativeRouge: {
        JudgeScore s;
        s.metric_id = spec.metric_id;
        s.raw = spec.kind == ScorerKind::NativeRougeProxy
                    ? textmetrics::rouge_proxy(textmetrics::tokenize(item.summary), textmetrics::tokenize(item.article))
                    : native_rouge(spec.variant, item.summary, item.article);
        s.normalized = s.raw;
        s.provenance = {std::string(textmetrics::kTokenizerTag), "", 1, 0.0};
        return s;
    }
    }
    throw ConfigError("unhandled scorer kind");
}

/// Scores every item with every spec. Per-cell failures become null cells
/// with the error kept; the batch fails only when the unscored fraction
/// exceeds opt.max_unscored_fraction.
inline ScoreMatrix score_batch(std::vector<ScoringItem> items, const std::vector<ScorerSpec>& specs,
                               const ScoringResources& res, const BatchOptions& opt = {}) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].instance_id == items[i - 1].instance_id) throw IntegrityError("duplicate instance id " + items[i].instance_id);
    }
    ScoreMatrix m;
    for (const auto& it : items) m.instance_ids.push_back(it.instance_id);
    for (const auto& s : specs) m.metric_ids.push_back(s.metric_id);
    m.cells.assign(items.size(), std::vector<ScoreCell>(specs.size()));

    std::vector<std::unique_ptr<modelio::ExternalScorer>> externals(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
        if (specs[k].kind == ScorerKind::External) {
            if (!res.endpoints) throw ConfigError("external scorers need an endpoint registry");
            externals[k] = modelio::make_scorer(res.endpoints->scorer(specs[k].endpoint));
        }
    }
    const std::size_t total = items.size() * specs.size();
    parallel_for(total, opt.jobs, [&](std::size_t cell) {
        auto i = cell / specs.size(), k = cell % specs.size();
        try {
            m.cells[i][k].score = score_one(specs[k], items[i], res, opt, externals[k].get());
        } catch (const ScoringError& e) {
            m.cells[i][k].error = e.what();
        } catch (const ProtocolError& e) {
            m.cells[i][k].error = e.what();
        } catch (const TransportError& e) {
            m.cells[i][k].error = e.what();
        }
    });
    auto unscored = m.unscored();
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t k = 0; k < specs.size(); ++k)
            if (!m.cells[i][k].score) log_warning("unscored cell (" + m.instance_ids[i] + ", " + m.metric_ids[k] + "): " + m.cells[i][k].error);
    if (total > 0 && static_cast<double>(unscored) / static_cast<double>(total) > opt.max_unscored_fraction) {
        throw ScoringError(std::to_string(unscored) + " of " + std::to_string(total) + " cells unscored, above the threshold");
    }
    return m;
}

/// One record per cell: {instance_id, metric_id, raw, normalized, provenance}.
inline std::vector<Json> to_records(const ScoreMatrix& m) {
    std::vector<Json> out;
    for (std::size_t i = 0; i < m.instance_ids.size(); ++i) {
        for (std::size_t k = 0; k < m.metric_ids.size(); ++k) {
            const auto& c = m.cells[i][k];
            Json r{{"instance_id", m.instance_ids[i]}, {"metric_id", m.metric_ids[k]}};
            if (c.score) {
                if (c.score->likert) r["raw"] = static_cast<int>(c.score->raw);
                else r["raw"] = c.score->raw;
                r["normalized"] = c.score->normalized;
                r["provenance"] = c.score->provenance.digest();
                r["endpoint"] = c.score->provenance.endpoint;
                r["attempts"] = c.score->provenance.attempts;
            } else {
                r["raw"] = nullptr;
                r["normalized"] = nullptr;
                r["error"] = c.error;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace persum::judge
