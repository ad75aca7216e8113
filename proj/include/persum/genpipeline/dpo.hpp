#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persum/genpipeline/rerank.hpp"
#include "persum/modelio/endpoint.hpp"
#include "persum/util/log.hpp"

namespace persum::genpipeline {

struct PreferencePair {
    std::string input_id;
    std::string prompt;
    std::string chosen;
    std::string rejected;
    double chosen_score = 0.0;
    double rejected_score = 0.0;
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    Json judge_provenance = Json::object();
};

inline Json to_json(const PreferencePair& p) {
    return {{"input_id", p.input_id},
            {"prompt", p.prompt},
            {"chosen", p.chosen},
            {"rejected", p.rejected},
            {"chosen_score", p.chosen_score},
            {"rejected_score", p.rejected_score},
            {"epoch", p.epoch},
            {"seed", p.seed},
            {"judge_provenance", p.judge_provenance}};
}

/// A scored candidate set together with the prompt it was generated from.
struct PairingInput {
    std::string prompt;
    CandidateSet set;
};

struct PairingOptions {
    double margin = 0.05;
    std::size_t pairs_per_input = 1;
};

/// Pairs per input, largest score gap first: with one pair per input this is
/// best against worst. Pairs below the margin or with identical text are
/// never emitted; an input yielding nothing is skipped with a warning.
inline std::vector<PreferencePair> build_preference_pairs(const std::vector<PairingInput>& inputs, const PairingOptions& opt,
                                                          std::size_t epoch = 0, std::size_t* skipped = nullptr) {
    if (!(opt.margin >= 0.0)) throw ParameterError("margin must be non-negative");
    if (opt.pairs_per_input < 1) throw ParameterError("pairs_per_input must be at least 1");
    std::vector<PreferencePair> out;
    std::size_t skip = 0;
    for (const auto& in : inputs) {
        const auto& cands = in.set.candidates;
        std::size_t scored = 0;
        for (const auto& c : cands) scored += c.combined ? 1 : 0;
        if (scored < 2) {
            ++skip;
            log_warning("preference pairs: '" + in.set.input_id + "' has fewer than two scored candidates; input skipped");
            continue;
        }
        struct Gap {
            double gap;
            std::size_t hi, lo;
        };
        std::vector<Gap> gaps;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (std::size_t j = 0; j < cands.size(); ++j) {
                if (!cands[i].combined || !cands[j].combined) continue;
                double g = *cands[i].combined - *cands[j].combined;
                if (g > 0.0 && g >= opt.margin && cands[i].summary != cands[j].summary) gaps.push_back({g, i, j});
            }
        }
        if (gaps.empty()) {
            ++skip;
            log_warning("preference pairs: no pair of '" + in.set.input_id + "' reaches the margin; input skipped");
            continue;
        }
        std::stable_sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.gap > b.gap; });
        for (std::size_t k = 0; k < std::min(opt.pairs_per_input, gaps.size()); ++k) {
            const auto& hi = cands[gaps[k].hi];
            const auto& lo = cands[gaps[k].lo];
            PreferencePair p;
            p.input_id = in.set.input_id;
            p.prompt = in.prompt;
            p.chosen = hi.summary;
            p.rejected = lo.summary;
            p.chosen_score = *hi.combined;
            p.rejected_score = *lo.combined;
            p.epoch = epoch;
            p.seed = in.set.seed;
            p.judge_provenance = {{"chosen", hi.provenance}, {"rejected", lo.provenance}};
            out.push_back(std::move(p));
        }
    }
    if (skipped) *skipped = skip;
    return out;
}

struct EpochLoopConfig {
    std::size_t epochs = 10;
    std::size_t candidates_per_input = 3;
    PairingOptions pairing;
    /// epoch -> model endpoint name; the external trainer's checkpoint for
    /// that epoch is expected to be served there.
    std::map<std::size_t, std::string> endpoint_schedule;
    /// Fresh candidates every epoch (sample indices offset by epoch * N).
    /// When false, epoch 0's scored candidates are re-exported each epoch.
    bool regenerate = true;
    std::size_t jobs = 1;
    int max_attempts = 3;
};

struct EpochExport {
    std::size_t epoch = 0;
    std::filesystem::path path;
    std::size_t pairs = 0;
    std::size_t skipped_inputs = 0;
};

struct EpochLoopResult {
    std::vector<EpochExport> exports;
    std::optional<std::size_t> halted_at;
    std::string halt_reason;
};

inline std::filesystem::path epoch_export_path(const std::filesystem::path& dir, std::size_t epoch) {
    char name[64];
    std::snprintf(name, sizeof name, "pairs_epoch_%02zu.jsonl", epoch);
    return dir / name;
}

/// Per epoch: sample candidates with that epoch's endpoint, score them, pair
/// them, and write one JSONL file whose first line is `header` (with the
/// epoch and endpoint added). No weights are ever updated here. A missing
/// schedule entry stops the loop; files for earlier epochs stay in place.
inline EpochLoopResult dpo_rr_epoch_loop(const std::vector<GenerationTask>& inputs, const EpochLoopConfig& cfg,
                                         modelio::ModelClient& client, const modelio::EndpointRegistry& endpoints,
                                         const std::vector<WeightedScorer>& scorers, const std::filesystem::path& out_dir,
                                         const Json& header = Json::object()) {
    if (cfg.epochs < 1) throw ParameterError("epochs must be at least 1");
    if (cfg.candidates_per_input < 2) throw ParameterError("candidates_per_input must be at least 2");
    EpochLoopResult result;
    std::vector<PairingInput> first_epoch;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        auto sched = cfg.endpoint_schedule.find(e);
        if (sched == cfg.endpoint_schedule.end() || !endpoints.has_model(sched->second)) {
            result.halted_at = e;
            result.halt_reason = sched == cfg.endpoint_schedule.end()
                                     ? "no endpoint scheduled for epoch " + std::to_string(e)
                                     : "unknown endpoint '" + sched->second + "' for epoch " + std::to_string(e);
            log_warning("dpo loop halted: " + result.halt_reason);
            break;
        }
        const auto& endpoint = endpoints.model(sched->second);
        std::vector<PairingInput> pairing(inputs.size());
        if (!cfg.regenerate && e > 0) {
            pairing = first_epoch;
        } else {
            const auto n = cfg.candidates_per_input;
            const auto offset = static_cast<std::uint32_t>(cfg.regenerate ? e * n : 0);
            parallel_for(inputs.size(), cfg.jobs, [&](std::size_t i) {
                GenContext ctx{client, endpoint, cfg.max_attempts};
                auto set = generate_candidates(inputs[i], ctx, n, offset);
                score_candidates(set, inputs[i], scorers);
                pairing[i] = {zero_shot_prompt(inputs[i]), std::move(set)};
            });
            if (e == 0) first_epoch = pairing;
        }
        EpochExport ex;
        ex.epoch = e;
        ex.path = epoch_export_path(out_dir, e);
        auto pairs = build_preference_pairs(pairing, cfg.pairing, e, &ex.skipped_inputs);
        ex.pairs = pairs.size();
        Json h = header;
        h["epoch"] = e;
        h["endpoint"] = endpoint.name;
        std::vector<Json> lines{Json{{"header", h}}};
        for (const auto& p : pairs) lines.push_back(to_json(p));
        write_file_atomic(ex.path, to_jsonl(lines));
        result.exports.push_back(ex);
    }
    return result;
}

} // namespace persum::genpipeline
