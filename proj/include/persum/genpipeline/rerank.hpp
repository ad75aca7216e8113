#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persum/genpipeline/generate.hpp"
#include "persum/judge/judge.hpp"
#include "persum/textmetrics/rouge.hpp"
#include "persum/util/parallel.hpp"
#include "persum/util/random.hpp"

namespace persum::genpipeline {

struct Candidate {
    std::string summary;
    std::uint32_t sample_index = 0;
    bool flagged = false;
    std::map<std::string, double> scores; // metric id -> normalized score
    std::optional<double> combined;
    std::vector<std::string> errors;
    Json provenance = Json::array();
};

struct CandidateSet {
    std::string input_id;
    std::uint64_t seed = 0;
    std::vector<Candidate> candidates;
    std::size_t selected = 0;
    bool degenerate = false; // every candidate has the same text

    std::size_t size() const noexcept { return candidates.size(); }
    const Candidate& best() const { return candidates.at(selected); }
};

inline Json to_json(const Candidate& c) {
    Json scores = Json::object();
    for (const auto& [k, v] : c.scores) scores[k] = v;
    return {{"summary", c.summary},
            {"sample_index", c.sample_index},
            {"flagged", c.flagged},
            {"scores", scores},
            {"combined", c.combined ? Json(*c.combined) : Json(nullptr)},
            {"errors", c.errors},
            {"provenance", c.provenance}};
}

inline Json to_json(const CandidateSet& s) {
    Json cands = Json::array();
    for (const auto& c : s.candidates) cands.push_back(to_json(c));
    return {{"input_id", s.input_id}, {"seed", s.seed}, {"selected", s.selected}, {"degenerate", s.degenerate}, {"candidates", cands}};
}

/// Scores one candidate summary for a task; throws ScoringError,
/// ProtocolError or TransportError when no score can be produced.
using CandidateScoreFn = std::function<judge::JudgeScore(const GenerationTask&, const std::string& summary)>;

struct WeightedScorer {
    std::string metric_id;
    double weight = 1.0;
    CandidateScoreFn score;
};

/// Coverage and faithfulness judges against the target-perspective article.
inline std::vector<WeightedScorer> judge_scorers(modelio::ModelClient& client, const modelio::ModelEndpoint& endpoint,
                                                 judge::JudgeOptions opt = {}, double coverage_weight = 0.5,
                                                 double faithfulness_weight = 0.5) {
    auto* c = &client;
    auto ep = endpoint;
    return {{"llm_coverage", coverage_weight,
             [c, ep, opt](const GenerationTask& t, const std::string& s) {
                 return judge::llm_coverage(t.target_article().text(), s, *c, ep, opt);
             }},
            {"llm_faithfulness", faithfulness_weight, [c, ep, opt](const GenerationTask& t, const std::string& s) {
                 return judge::llm_faithfulness(t.target_article().text(), s, *c, ep, opt);
             }}};
}

/// Mean of ROUGE-1/2/L precision and recall against `reference`, or against
/// the concatenated target-perspective documents when no reference is given.
inline WeightedScorer rouge_proxy_scorer(std::optional<std::string> reference = std::nullopt) {
    return {"rouge_proxy", 1.0, [reference](const GenerationTask& t, const std::string& s) {
                judge::JudgeScore js;
                js.metric_id = "rouge_proxy";
                auto ref = textmetrics::tokenize(reference ? *reference : t.target_article().text());
                js.raw = js.normalized = textmetrics::rouge_proxy(textmetrics::tokenize(s), ref);
                js.provenance.endpoint = "native";
                return js;
            }};
}

/// Weighted mean of each scorer's normalized score. A candidate any scorer
/// fails on stays unscored.
inline void score_candidates(CandidateSet& set, const GenerationTask& task, const std::vector<WeightedScorer>& scorers,
                             std::size_t jobs = 1) {
    if (scorers.empty()) throw ParameterError("rerank needs at least one scorer");
    double total_weight = 0.0;
    for (const auto& s : scorers) {
        if (!(s.weight >= 0.0)) throw ParameterError("scorer weight must be non-negative: " + s.metric_id);
        total_weight += s.weight;
    }
    if (!(total_weight > 0.0)) throw ParameterError("scorer weights sum to zero");
    parallel_for(set.candidates.size(), jobs, [&](std::size_t i) {
        auto& c = set.candidates[i];
        double acc = 0.0;
        bool ok = true;
        for (const auto& s : scorers) {
            try {
                auto js = s.score(task, c.summary);
                if (!(js.normalized >= 0.0 && js.normalized <= 1.0))
                    throw ProtocolError(s.metric_id + ": normalized score outside [0,1]");
                c.scores[s.metric_id] = js.normalized;
                c.provenance.push_back({{"metric_id", s.metric_id},
                                        {"endpoint", js.provenance.endpoint},
                                        {"prompt_digest", js.provenance.prompt_digest},
                                        {"attempts", js.provenance.attempts}});
                acc += s.weight * js.normalized;
            } catch (const ScoringError& e) {
                ok = false;
                c.errors.push_back(s.metric_id + ": " + e.what());
            } catch (const ProtocolError& e) {
                ok = false;
                c.errors.push_back(s.metric_id + ": " + e.what());
            } catch (const TransportError& e) {
                ok = false;
                c.errors.push_back(s.metric_id + ": " + e.what());
            }
        }
        if (ok) c.combined = acc / total_weight;
    });
}

/// Argmax of the combined score; exact ties are broken by a draw seeded from
/// the set's seed.
inline void select_best(CandidateSet& set) {
    if (set.candidates.empty()) throw RerankError("empty candidate set");
    std::size_t unscored = 0;
    for (const auto& c : set.candidates) unscored += c.combined ? 0 : 1;
    if (2 * unscored > set.candidates.size())
        throw RerankError(set.input_id + ": " + std::to_string(unscored) + " of " + std::to_string(set.candidates.size()) +
                          " candidates are unscored");
    std::optional<double> best;
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& c = set.candidates[i];
        if (!c.combined) continue;
        if (!best || *c.combined > *best) {
            best = c.combined;
            ties = {i};
        } else if (*c.combined == *best) {
            ties.push_back(i);
        }
    }
    auto rng = make_rng(set.seed, 0x7e7au);
    set.selected = ties.size() == 1 ? ties[0] : ties[uniform_index(rng, ties.size())];
    set.degenerate = std::all_of(set.candidates.begin(), set.candidates.end(),
                                 [&](const Candidate& c) { return c.summary == set.candidates[0].summary; });
}

/// N zero-shot samples at sample indices first_index .. first_index+N-1.
inline CandidateSet generate_candidates(const GenerationTask& task, GenContext& ctx, std::size_t n,
                                        std::uint32_t first_index = 0, std::size_t jobs = 1) {
    if (n < 1) throw ParameterError("need at least one candidate");
    CandidateSet set;
    set.input_id = task.input_id();
    set.seed = task.seed;
    set.candidates.resize(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        auto idx = first_index + static_cast<std::uint32_t>(i);
        auto r = zero_shot(task, ctx, idx);
        set.candidates[i].summary = r.summary;
        set.candidates[i].sample_index = idx;
        set.candidates[i].flagged = r.flagged;
    });
    return set;
}

struct RerankResult {
    std::string summary;
    CandidateSet candidates;
};

/// Best-of-N: sample N candidates, score each, keep the argmax.
/// N = 1 is accepted and degenerates to zero-shot plus scoring.
inline RerankResult rerank(const GenerationTask& task, GenContext& ctx, std::size_t n,
                           const std::vector<WeightedScorer>& scorers, std::size_t jobs = 1) {
    auto set = generate_candidates(task, ctx, n, 0, jobs);
    score_candidates(set, task, scorers, jobs);
    select_best(set);
    return {set.best().summary, std::move(set)};
}

inline RerankResult rerank_rouge_proxy(const GenerationTask& task, GenContext& ctx, std::size_t n,
                                       std::optional<std::string> reference = std::nullopt, std::size_t jobs = 1) {
    return rerank(task, ctx, n, {rouge_proxy_scorer(std::move(reference))}, jobs);
}

} // namespace persum::genpipeline
