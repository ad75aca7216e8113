#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "persum/cli/config.hpp"
#include "persum/corpus/ingest.hpp"
#include "persum/corpus/testset.hpp"
#include "persum/genpipeline/dpo.hpp"
#include "persum/genpipeline/generate.hpp"
#include "persum/genpipeline/rerank.hpp"
#include "persum/judge/judge.hpp"
#include "persum/metricbench/bench.hpp"
#include "persum/metricbench/human_eval.hpp"
#include "persum/modelio/scorer.hpp"
#include "persum/ranking/bootstrap.hpp"
#include "persum/textmetrics/abstractiveness.hpp"
#include "persum/textmetrics/iaa.hpp"

namespace persum::cli {

enum class OptKind { String, Int, Double, Flag };
enum class Role { Param, Input, Output };

struct OptSpec {
    std::string name;
    OptKind kind = OptKind::String;
    Role role = Role::Param;
    Json fallback = nullptr;
    bool required = false;
    std::string help;
};

struct Context {
    std::string command;
    Json config;
    Json params;
    std::map<std::string, std::string> outputs;
    Json header;
    modelio::EndpointRegistry endpoints;
    std::shared_ptr<modelio::ModelClient> client;

    bool has(const std::string& n) const {
        if (!params.contains(n) || params.at(n).is_null()) return false;
        return !params.at(n).is_string() || !params.at(n).get<std::string>().empty();
    }
    std::string str(const std::string& n) const { return has(n) ? params.at(n).get<std::string>() : std::string(); }
    long long integer(const std::string& n) const { return params.at(n).get<long long>(); }
    double number(const std::string& n) const { return params.at(n).get<double>(); }
    bool flag(const std::string& n) const { return params.contains(n) && params.at(n).get<bool>(); }
    std::optional<std::string> output(const std::string& n) const {
        auto it = outputs.find(n);
        if (it == outputs.end() || it->second.empty()) return std::nullopt;
        return it->second;
    }
    std::uint64_t seed() const { return config_seed(config); }
    std::size_t jobs() const { return config_jobs(config); }
};

using Handler = std::function<void(Context&)>;

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<OptSpec> opts;
    Handler run;
};

namespace cmd_detail {

inline void write_jsonl(const std::string& path, const Json& header, const std::vector<Json>& records) {
    std::vector<Json> lines{Json{{"header", header}}};
    lines.insert(lines.end(), records.begin(), records.end());
    write_file_atomic(path, to_jsonl(lines));
}

inline void write_json(const std::string& path, const Json& header, const Json& body) {
    Json doc{{"header", header}};
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
    write_file_atomic(path, doc.dump(2) + "\n");
}

/// JSONL or JSON-array records, without a leading run header line.
inline std::vector<Json> read_records(const std::string& path) {
    auto text = read_file(path);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        auto arr = parse_json(text, path);
        return {arr.begin(), arr.end()};
    }
    if (first != std::string::npos && text[first] == '{' && text.find('\n', first) == std::string::npos) {
        auto doc = parse_json(text, path);
        if (doc.contains("records")) return {doc.at("records").begin(), doc.at("records").end()};
        return {doc};
    }
    auto lines = read_jsonl(path);
    std::vector<Json> out;
    for (auto& l : lines)
        if (!(l.is_object() && l.contains("header"))) out.push_back(std::move(l));
    return out;
}

inline std::string generator_name(const Context& ctx, const char* param = "generator") {
    auto name = ctx.has(param) ? ctx.str(param) : ctx.config.at("generator_endpoint").get<std::string>();
    if (name.empty()) throw ConfigError("no generator endpoint: pass --" + std::string(param) + " or set generator_endpoint");
    return name;
}

inline std::string judge_name(const Context& ctx) {
    auto name = ctx.has("judge") ? ctx.str("judge") : ctx.config.at("judge_endpoint").get<std::string>();
    if (name.empty()) throw ConfigError("no judge endpoint: pass --judge or set judge_endpoint");
    return name;
}

inline std::vector<std::string> perspectives(const std::string& p) {
    if (p == "both") return {corpus::kLeft, corpus::kRight};
    if (p == corpus::kLeft || p == corpus::kRight) return {p};
    throw ConfigError("perspective must be Left, Right or both");
}

inline std::vector<genpipeline::ArticlePair> load_pairs(const Context& ctx) {
    return genpipeline::article_pairs_from_json(read_json(ctx.str("pairs")));
}

/// Tasks in (pair_id, perspective) order, each with its own derived seed.
inline std::vector<genpipeline::GenerationTask> make_tasks(const std::vector<genpipeline::ArticlePair>& pairs,
                                                           const std::vector<std::string>& sides, std::uint64_t seed) {
    std::vector<genpipeline::GenerationTask> tasks;
    for (const auto& p : pairs)
        for (const auto& s : sides) tasks.push_back({p, s, derive_seed(seed, tasks.size())});
    return tasks;
}

inline std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& s) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("grid entries look like k_g:k_b, got '" + item + "'");
        try {
            out.emplace_back(std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1)));
        } catch (const std::logic_error&) {
            throw ConfigError("grid entries look like k_g:k_b, got '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::vector<double> parse_weights(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("weights look like coverage,faithfulness");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::logic_error&) {
        throw ConfigError("weights look like coverage,faithfulness, got '" + s + "'");
    }
}

inline std::vector<genpipeline::WeightedScorer> rerank_scorers(const Context& ctx) {
    auto kind = ctx.str("scorer");
    if (kind == "rouge_proxy") return {genpipeline::rouge_proxy_scorer()};
    if (kind != "judge") throw ConfigError("scorer must be judge or rouge_proxy");
    auto w = parse_weights(ctx.str("weights"));
    return genpipeline::judge_scorers(*ctx.client, ctx.endpoints.model(judge_name(ctx)), {}, w[0], w[1]);
}

inline judge::ScorerSpec metric_spec(const Context& ctx, const std::string& metric_id) {
    for (const auto& j : ctx.config.at("metrics")) {
        auto s = judge::scorer_spec_from_json(j);
        if (s.metric_id == metric_id) return s;
    }
    throw ConfigError("metric '" + metric_id + "' is not configured");
}

inline Json mean_sd_json(const std::vector<double>& v) {
    if (v.empty()) return Json{{"mean", nullptr}, {"sd", nullptr}, {"n", 0}};
    auto m = metricbench::mean_sd(v);
    return Json{{"mean", m.mean}, {"sd", m.sd}, {"n", v.size()}};
}

inline Json mean_sd_json(const metricbench::MeanSd& m) { return Json{{"mean", m.mean}, {"sd", m.sd}}; }

inline void fail_if_errors(std::size_t errors, std::size_t total, const std::string& what) {
    if (errors > 0)
        throw TransportError(std::to_string(errors) + " of " + std::to_string(total) + " " + what +
                             " failed; see the error fields in the output");
}

// ---------------------------------------------------------------- commands

inline void build_testset(Context& ctx) {
    auto annotated = corpus::ingest_annotations_file(ctx.str("annotations"));
    const modelio::ModelEndpoint* gen = nullptr;
    if (ctx.has("generator") || !ctx.config.at("generator_endpoint").get<std::string>().empty())
        gen = &ctx.endpoints.model(generator_name(ctx));
    std::optional<corpus::ModelContext> mctx;
    if (gen) mctx.emplace(corpus::ModelContext{*ctx.client, *gen});
    auto prepared = corpus::prepare_articles(annotated, mctx ? &*mctx : nullptr);

    corpus::TestsetConfig tc;
    tc.grid = parse_grid(ctx.str("grid"));
    tc.per_article_budget = static_cast<std::size_t>(ctx.integer("budget"));
    tc.mode = corpus::parse_compose_mode(ctx.str("mode"));
    tc.include_unverified = ctx.flag("include-unverified");
    tc.jobs = ctx.jobs();
    corpus::FusionOptions fusion;
    if (tc.mode == corpus::ComposeMode::Fuse) {
        if (!gen) throw ConfigError("fuse mode needs a generator endpoint");
        if (!ctx.has("verifier")) throw ConfigError("fuse mode needs --verifier (an entailment scorer endpoint)");
        std::shared_ptr<modelio::ExternalScorer> scorer = modelio::make_scorer(ctx.endpoints.scorer(ctx.str("verifier")));
        fusion.client = ctx.client.get();
        fusion.endpoint = gen;
        fusion.verifier = [scorer](std::string_view context, std::string_view claim) {
            return modelio::external_score(*scorer, context, claim, "verifier");
        };
    }
    auto res = corpus::build_testset(prepared, tc, ctx.seed(), fusion);
    std::vector<Json> records;
    for (const auto& inst : res.instances) records.push_back(corpus::to_json(inst));
    write_jsonl(*ctx.output("out"), ctx.header, records);
    std::cerr << res.instances.size() << " instances from " << prepared.size() << " articles (" << res.skipped.size()
              << " skipped, " << res.unverified << " unverified)\n";
}

inline std::vector<corpus::SyntheticInstance> load_testset(const std::string& path) {
    std::vector<corpus::SyntheticInstance> out;
    for (const auto& r : read_records(path)) {
        auto inst = corpus::instance_from_json(r);
        if (!corpus::ground_truth_consistent(inst))
            throw IntegrityError(inst.instance_id + ": stored ground truth disagrees with its composition");
        out.push_back(std::move(inst));
    }
    return out;
}

inline void eval_metrics(Context& ctx) {
    auto instances = load_testset(ctx.str("testset"));
    metricbench::MetricScores scores;
    if (ctx.has("scores")) {
        for (const auto& r : read_records(ctx.str("scores"))) {
            const Json* v = r.contains("normalized") ? &r.at("normalized") : r.contains("score") ? &r.at("score") : nullptr;
            if (!v || v->is_null()) continue;
            scores[require<std::string>(r, "metric_id", "score record")][require<std::string>(r, "instance_id", "score record")] =
                v->get<double>();
        }
    } else {
        std::vector<judge::ScorerSpec> specs;
        for (const auto& j : ctx.config.at("metrics")) specs.push_back(judge::scorer_spec_from_json(j));
        if (specs.empty()) throw ConfigError("no --scores file given and no metrics configured");
        if (!ctx.has("annotations")) throw ConfigError("scoring needs --annotations for the source article texts");
        std::map<std::string, std::string> article_text;
        for (const auto& aa : corpus::ingest_annotations_file(ctx.str("annotations")))
            article_text[aa.article.topic + "/" + aa.article.perspective] = aa.article.text();
        std::vector<judge::ScoringItem> items;
        for (const auto& inst : instances) {
            auto it = article_text.find(inst.topic + "/" + inst.perspective);
            if (it == article_text.end())
                throw IntegrityError(inst.instance_id + ": no article for (" + inst.topic + ", " + inst.perspective + ")");
            items.push_back({inst.instance_id, it->second, inst.summary_text});
        }
        judge::BatchOptions bo;
        bo.jobs = ctx.jobs();
        bo.max_unscored_fraction = ctx.number("max-unscored");
        auto m = judge::score_batch(items, specs, {ctx.client.get(), &ctx.endpoints}, bo);
        for (std::size_t i = 0; i < m.instance_ids.size(); ++i)
            for (std::size_t k = 0; k < m.metric_ids.size(); ++k)
                if (m.cells[i][k].score) scores[m.metric_ids[k]][m.instance_ids[i]] = m.cells[i][k].score->normalized;
        if (auto p = ctx.output("scores-out")) write_jsonl(*p, ctx.header, judge::to_records(m));
    }
    if (scores.empty()) throw ParameterError("no metric scores to evaluate");
    std::vector<metricbench::TruthRow> truth;
    for (const auto& inst : instances) truth.push_back(metricbench::truth_row(inst));
    metricbench::WinrateOptions wo;
    auto ties = ctx.str("ties");
    if (ties == "random") wo.ties = metricbench::TieMode::Random;
    else if (ties == "half") wo.ties = metricbench::TieMode::HalfCredit;
    else throw ConfigError("ties must be random or half");
    wo.bootstrap = static_cast<std::size_t>(ctx.integer("bootstrap"));
    wo.seed = ctx.seed();
    auto results = metricbench::benchmark_metrics(truth, scores, wo);
    Json rows = Json::array();
    for (const auto& r : results) rows.push_back(metricbench::to_json(r));
    auto table = metricbench::render_table(results);
    write_json(*ctx.output("out"), ctx.header, Json{{"n_instances", instances.size()}, {"results", rows}, {"table", table}});
    if (auto p = ctx.output("table")) write_file_atomic(*p, table);
}

inline ranking::ScoreTable table_from_records(const std::vector<Json>& records, const char* doc_field) {
    std::map<std::string, std::map<std::string, std::optional<double>>> cells;
    std::set<std::string> docs;
    for (const auto& r : records) {
        auto m = require<std::string>(r, "method", "score record");
        auto d = require<std::string>(r, doc_field, "score record");
        const Json* v = r.contains("score") ? &r.at("score") : r.contains("normalized") ? &r.at("normalized") : nullptr;
        docs.insert(d);
        auto& cell = cells[m][d];
        if (cell) throw IntegrityError("duplicate score for (" + m + ", " + d + ")");
        if (v && !v->is_null()) cell = v->get<double>();
    }
    ranking::ScoreTable t;
    t.documents.assign(docs.begin(), docs.end());
    for (const auto& [m, row] : cells) {
        t.methods.push_back(m);
        std::vector<std::optional<double>> r;
        for (const auto& d : t.documents) {
            auto it = row.find(d);
            r.push_back(it == row.end() ? std::nullopt : it->second);
        }
        t.scores.push_back(std::move(r));
    }
    t.validate();
    return t;
}

inline void rank_methods(Context& ctx) {
    ranking::ScoreTable table;
    if (ctx.has("scores")) {
        auto path = ctx.str("scores");
        if (path.ends_with(".jsonl")) table = table_from_records(read_records(path), "document_id");
        else table = ranking::score_table_from_json(read_json(path));
    } else if (ctx.has("summaries")) {
        if (!ctx.has("pairs") || !ctx.has("metric")) throw ConfigError("--summaries needs --pairs and --metric");
        std::map<std::string, genpipeline::ArticlePair> pairs;
        for (auto& p : load_pairs(ctx)) pairs.emplace(p.pair_id, p);
        auto spec = metric_spec(ctx, ctx.str("metric"));
        std::vector<judge::ScoringItem> items;
        std::map<std::string, std::pair<std::string, std::string>> key; // item id -> (method, document)
        for (const auto& r : read_records(ctx.str("summaries"))) {
            auto method = require<std::string>(r, "method", "summary record");
            auto pid = require<std::string>(r, "pair_id", "summary record");
            auto side = require<std::string>(r, "perspective", "summary record");
            auto it = pairs.find(pid);
            if (it == pairs.end()) throw IntegrityError("summary for unknown pair " + pid);
            auto doc = pid + "/" + side;
            auto id = method + "|" + doc;
            key[id] = {method, doc};
            items.push_back({id, it->second.side(side).text(), require<std::string>(r, "summary", "summary record")});
        }
        judge::BatchOptions bo;
        bo.jobs = ctx.jobs();
        bo.max_unscored_fraction = ctx.number("max-unscored");
        auto m = judge::score_batch(items, {spec}, {ctx.client.get(), &ctx.endpoints}, bo);
        std::vector<Json> records;
        for (std::size_t i = 0; i < m.instance_ids.size(); ++i) {
            const auto& [method, doc] = key.at(m.instance_ids[i]);
            const auto& cell = m.cells[i][0];
            records.push_back({{"method", method},
                               {"document_id", doc},
                               {"score", cell.score ? Json(cell.score->normalized) : Json(nullptr)}});
        }
        if (auto p = ctx.output("scores-out")) write_jsonl(*p, ctx.header, records);
        table = table_from_records(records, "document_id");
    } else {
        throw ConfigError("rank-methods needs --scores or --summaries");
    }
    ranking::BootstrapOptions bo;
    bo.resamples = static_cast<std::size_t>(ctx.integer("bootstrap"));
    bo.seed = ctx.seed();
    bo.mode = ranking::parse_comparison_mode(ctx.str("mode"));
    bo.jobs = ctx.jobs();
    auto report = ranking::rank_with_bootstrap(table, bo);
    auto text = ranking::render_table(report);
    write_json(*ctx.output("out"), ctx.header,
               Json{{"n_documents", table.documents.size()}, {"ranking", ranking::to_json(report)}, {"table", text}});
    if (auto p = ctx.output("table")) write_file_atomic(*p, text);
}

inline void generate(Context& ctx) {
    auto tasks = make_tasks(load_pairs(ctx), perspectives(ctx.str("perspective")), ctx.seed());
    const auto& ep = ctx.endpoints.model(generator_name(ctx));
    auto method = ctx.str("method");
    if (method != "zero_shot" && method != "self_refine" && method != "debate")
        throw ConfigError("method must be zero_shot, self_refine or debate");
    struct Slot {
        genpipeline::GenerationResult result;
        std::string error;
    };
    std::vector<Slot> slots(tasks.size());
    parallel_for(tasks.size(), ctx.jobs(), [&](std::size_t i) {
        genpipeline::GenContext g{*ctx.client, ep};
        try {
            if (method == "zero_shot") slots[i].result = genpipeline::zero_shot(tasks[i], g);
            else if (method == "self_refine")
                slots[i].result = genpipeline::self_refine(tasks[i], g, static_cast<std::size_t>(ctx.integer("iterations")));
            else
                slots[i].result = genpipeline::debate(tasks[i], g, static_cast<std::size_t>(ctx.integer("agents")),
                                                      static_cast<std::size_t>(ctx.integer("rounds")));
        } catch (const genpipeline::GenerationAborted& e) {
            slots[i].error = e.what();
            slots[i].result.transcript = e.transcript();
        }
    });
    std::vector<Json> records, transcripts;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& r = slots[i].result;
        Json rec{{"pair_id", tasks[i].pair.pair_id},
                 {"perspective", tasks[i].target},
                 {"method", method},
                 {"summary", slots[i].error.empty() ? Json(r.summary) : Json(nullptr)},
                 {"flagged", r.flagged},
                 {"calls", r.calls}};
        if (!r.flag_reason.empty()) rec["flag_reason"] = r.flag_reason;
        if (!slots[i].error.empty()) {
            rec["error"] = slots[i].error;
            ++errors;
        }
        records.push_back(rec);
        Json t = Json::array();
        for (const auto& m : r.transcript) t.push_back(genpipeline::to_json(m));
        transcripts.push_back({{"input_id", tasks[i].input_id()}, {"method", method}, {"transcript", t}});
    }
    write_jsonl(*ctx.output("out"), ctx.header, records);
    if (auto p = ctx.output("transcripts")) write_jsonl(*p, ctx.header, transcripts);
    fail_if_errors(errors, tasks.size(), "generations");
}

inline void rerank(Context& ctx) {
    auto tasks = make_tasks(load_pairs(ctx), perspectives(ctx.str("perspective")), ctx.seed());
    const auto& ep = ctx.endpoints.model(generator_name(ctx));
    auto scorers = rerank_scorers(ctx);
    auto n = static_cast<std::size_t>(ctx.integer("n"));
    std::vector<Json> records(tasks.size());
    std::vector<bool> failed(tasks.size(), false);
    parallel_for(tasks.size(), ctx.jobs(), [&](std::size_t i) {
        genpipeline::GenContext g{*ctx.client, ep};
        Json rec{{"pair_id", tasks[i].pair.pair_id}, {"perspective", tasks[i].target}, {"method", "rerank"}};
        try {
            auto r = genpipeline::rerank(tasks[i], g, n, scorers);
            rec["summary"] = r.summary;
            rec["selected"] = r.candidates.selected;
            rec["degenerate"] = r.candidates.degenerate;
            rec["candidates"] = genpipeline::to_json(r.candidates).at("candidates");
        } catch (const RerankError& e) {
            rec["summary"] = nullptr;
            rec["error"] = e.what();
            failed[i] = true;
        } catch (const TransportError& e) {
            rec["summary"] = nullptr;
            rec["error"] = e.what();
            failed[i] = true;
        }
        records[i] = std::move(rec);
    });
    write_jsonl(*ctx.output("out"), ctx.header, records);
    fail_if_errors(static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true)), tasks.size(), "rerank inputs");
}

inline std::map<std::size_t, std::string> parse_schedule(const Context& ctx, std::size_t epochs) {
    std::map<std::size_t, std::string> out;
    auto s = ctx.str("schedule");
    if (!s.empty()) {
        std::size_t pos = 0;
        while (pos < s.size()) {
            auto comma = s.find(',', pos);
            auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("schedule entries look like epoch=endpoint, got '" + item + "'");
            try {
                out[std::stoul(item.substr(0, eq))] = item.substr(eq + 1);
            } catch (const std::logic_error&) {
                throw ConfigError("schedule entries look like epoch=endpoint, got '" + item + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    }
    if (ctx.config.contains("dpo_schedule")) {
        for (auto it = ctx.config.at("dpo_schedule").begin(); it != ctx.config.at("dpo_schedule").end(); ++it)
            out[std::stoul(it.key())] = it.value().get<std::string>();
        return out;
    }
    auto gen = generator_name(ctx);
    for (std::size_t e = 0; e < epochs; ++e) out[e] = gen;
    return out;
}

inline void export_dpo(Context& ctx) {
    auto pairs = load_pairs(ctx);
    auto train_n = static_cast<std::size_t>(ctx.integer("train-size"));
    if (train_n > 0) {
        std::vector<std::string> ids;
        for (const auto& p : pairs) ids.push_back(p.pair_id);
        auto split = corpus::split_dataset(ids, train_n, 0, ctx.seed());
        std::set<std::string> keep(split.train.begin(), split.train.end());
        std::erase_if(pairs, [&](const auto& p) { return !keep.contains(p.pair_id); });
    }
    auto tasks = make_tasks(pairs, perspectives(ctx.str("perspective")), ctx.seed());
    genpipeline::EpochLoopConfig lc;
    lc.epochs = static_cast<std::size_t>(ctx.integer("epochs"));
    lc.candidates_per_input = static_cast<std::size_t>(ctx.integer("candidates"));
    lc.pairing.margin = ctx.number("margin");
    lc.pairing.pairs_per_input = static_cast<std::size_t>(ctx.integer("pairs-per-input"));
    lc.endpoint_schedule = parse_schedule(ctx, lc.epochs);
    lc.regenerate = !ctx.flag("reuse");
    lc.jobs = ctx.jobs();
    auto scorers = rerank_scorers(ctx);
    std::filesystem::path dir = *ctx.output("out-dir");
    auto res = genpipeline::dpo_rr_epoch_loop(tasks, lc, *ctx.client, ctx.endpoints, scorers, dir, ctx.header);
    Json exports = Json::array();
    for (const auto& e : res.exports)
        exports.push_back({{"epoch", e.epoch}, {"file", e.path.filename().string()}, {"pairs", e.pairs}, {"skipped_inputs", e.skipped_inputs}});
    write_json((dir / "manifest.json").string(), ctx.header,
               Json{{"inputs", tasks.size()},
                    {"exports", exports},
                    {"halted_at", res.halted_at ? Json(*res.halted_at) : Json(nullptr)},
                    {"halt_reason", res.halt_reason}});
    if (res.halted_at) throw ConfigError("export halted at epoch " + std::to_string(*res.halted_at) + ": " + res.halt_reason);
}

struct IaaItem {
    std::string item_id;
    std::string text;
    std::map<std::string, std::vector<std::string>> annotations; // annotator -> excerpt texts
};

inline void iaa(Context& ctx) {
    std::vector<IaaItem> items;
    if (ctx.has("annotations")) {
        for (const auto& aa : corpus::ingest_annotations_file(ctx.str("annotations"))) {
            IaaItem it{aa.article.topic + "/" + aa.article.perspective, aa.article.text(), {}};
            for (const auto& e : aa.excerpts) it.annotations[e.annotator_id].push_back(e.text);
            items.push_back(std::move(it));
        }
    }
    if (ctx.has("items")) {
        auto doc = read_json(ctx.str("items"));
        const Json& arr = doc.is_object() ? doc.at("items") : doc;
        for (const auto& j : arr) {
            IaaItem it{require<std::string>(j, "item_id", "iaa item"), require<std::string>(j, "text", "iaa item"), {}};
            for (auto a = j.at("annotations").begin(); a != j.at("annotations").end(); ++a)
                it.annotations[a.key()] = a.value().get<std::vector<std::string>>();
            items.push_back(std::move(it));
        }
    }
    if (items.empty()) throw ConfigError("iaa needs --annotations or --items");
    const double tau = ctx.number("tau");
    Json per_item = Json::array();
    std::vector<double> overall, a_given_b, b_given_a;
    std::vector<std::vector<std::string>> all_sets;
    std::vector<std::string> texts;
    for (const auto& it : items) {
        texts.push_back(it.text);
        for (const auto& [who, set] : it.annotations) all_sets.push_back(set);
        for (auto a = it.annotations.begin(); a != it.annotations.end(); ++a) {
            for (auto b = std::next(a); b != it.annotations.end(); ++b) {
                auto rep = textmetrics::agreement(a->second, b->second, tau);
                overall.push_back(rep.r_overall);
                a_given_b.push_back(rep.r_a_given_b);
                b_given_a.push_back(rep.r_b_given_a);
                per_item.push_back({{"item_id", it.item_id},
                                    {"annotator_a", a->first},
                                    {"annotator_b", b->first},
                                    {"r_a_given_b", rep.r_a_given_b},
                                    {"r_b_given_a", rep.r_b_given_a},
                                    {"r_overall", rep.r_overall},
                                    {"matches", rep.matches.size()}});
            }
        }
    }
    if (overall.empty()) throw UndefinedMetricError("no item has two or more annotators");
    auto stats = textmetrics::highlight_stats(all_sets);
    auto base = textmetrics::iaa_random_baseline(stats, texts, ctx.seed(), static_cast<std::size_t>(ctx.integer("trials")), tau);
    write_json(*ctx.output("out"), ctx.header,
               Json{{"tau", tau},
                    {"agreement", {{"r_overall", mean_sd_json(overall)},
                                   {"r_a_given_b", mean_sd_json(a_given_b)},
                                   {"r_b_given_a", mean_sd_json(b_given_a)}}},
                    {"random_baseline", {{"mean", base.mean}, {"sd", base.sd}, {"trials", base.trials}}},
                    {"highlight_stats",
                     {{"count_mean", stats.count_mean},
                      {"count_var", stats.count_var},
                      {"length_mean", stats.length_mean},
                      {"length_var", stats.length_var}}},
                    {"pairs", per_item}});
}

inline void abstractiveness(Context& ctx) {
    std::map<std::string, genpipeline::ArticlePair> pairs;
    for (auto& p : load_pairs(ctx)) pairs.emplace(p.pair_id, p);
    const auto n = static_cast<std::size_t>(ctx.integer("ngram"));
    std::map<std::string, std::map<std::string, std::vector<double>>> agg; // method -> stat -> values
    Json rows = Json::array();
    for (const auto& r : read_records(ctx.str("summaries"))) {
        auto method = optional_field<std::string>(r, "method", "unknown");
        auto pid = require<std::string>(r, "pair_id", "summary record");
        auto it = pairs.find(pid);
        if (it == pairs.end()) throw IntegrityError("summary for unknown pair " + pid);
        if (!r.contains("summary") || r.at("summary").is_null()) continue;
        // The model saw both perspectives, so both count as source text.
        auto source = textmetrics::tokenize(it->second.left.text() + "\n\n" + it->second.right.text());
        auto summary = textmetrics::tokenize(r.at("summary").get<std::string>());
        Json row{{"method", method}, {"pair_id", pid}, {"perspective", optional_field<std::string>(r, "perspective", "")}};
        try {
            double v = textmetrics::novel_ngram_ratio(summary, source, n);
            row["novel_ngram_ratio"] = v;
            agg[method]["novel_ngram_ratio"].push_back(v);
        } catch (const UndefinedMetricError&) {
            row["novel_ngram_ratio"] = nullptr;
        }
        try {
            auto st = textmetrics::extractive_fragments(source, summary);
            row["ef_coverage"] = st.coverage;
            row["ef_density"] = st.density;
            row["compression"] = st.compression;
            agg[method]["ef_coverage"].push_back(st.coverage);
            agg[method]["ef_density"].push_back(st.density);
            agg[method]["compression"].push_back(st.compression);
        } catch (const UndefinedMetricError&) {
            row["ef_coverage"] = row["ef_density"] = row["compression"] = nullptr;
        }
        rows.push_back(row);
    }
    Json by_method = Json::object();
    for (const auto& [method, stats] : agg) {
        Json m = Json::object();
        for (const char* k : {"novel_ngram_ratio", "ef_coverage", "ef_density", "compression"}) {
            auto f = stats.find(k);
            m[k] = mean_sd_json(f == stats.end() ? std::vector<double>{} : f->second);
        }
        by_method[method] = m;
    }
    write_json(*ctx.output("out"), ctx.header, Json{{"ngram", n}, {"by_method", by_method}, {"records", rows}});
}

inline void human_scores(Context& ctx) {
    std::vector<metricbench::HumanEvalRecord> records;
    for (const auto& j : read_records(ctx.str("records"))) records.push_back(metricbench::human_record_from_json(j));
    Json rows = Json::array();
    std::map<std::string, std::vector<double>> cov, faith;
    for (const auto& r : records) {
        Json row{{"instance_id", r.instance_id}, {"method", r.method}};
        try {
            auto s = metricbench::human_scores(r);
            row["coverage"] = s.coverage;
            row["faithfulness"] = s.faithfulness;
            cov[r.method].push_back(s.coverage);
            faith[r.method].push_back(s.faithfulness);
        } catch (const UndefinedMetricError& e) {
            row["coverage"] = row["faithfulness"] = nullptr;
            row["error"] = e.what();
        }
        rows.push_back(row);
    }
    Json by_method = Json::object();
    for (const auto& [method, st] : metricbench::keypoint_inclusion_stats(records)) {
        by_method[method] = {{"n", st.n},
                             {"coverage", mean_sd_json(cov[method])},
                             {"faithfulness", mean_sd_json(faith[method])},
                             {"included", mean_sd_json(st.included)},
                             {"omitted", mean_sd_json(st.omitted)},
                             {"hallucinated", mean_sd_json(st.hallucinated)}};
    }
    write_json(*ctx.output("out"), ctx.header, Json{{"by_method", by_method}, {"records", rows}});
}

} // namespace cmd_detail

inline OptSpec in(std::string name, std::string help, bool required = true) {
    return {std::move(name), OptKind::String, Role::Input, "", required, std::move(help)};
}
inline OptSpec out(std::string name, std::string help, bool required = true) {
    return {std::move(name), OptKind::String, Role::Output, "", required, std::move(help)};
}
inline OptSpec str(std::string name, Json fallback, std::string help) {
    return {std::move(name), OptKind::String, Role::Param, std::move(fallback), false, std::move(help)};
}
inline OptSpec integer(std::string name, long long fallback, std::string help) {
    return {std::move(name), OptKind::Int, Role::Param, fallback, false, std::move(help)};
}
inline OptSpec real(std::string name, double fallback, std::string help) {
    return {std::move(name), OptKind::Double, Role::Param, fallback, false, std::move(help)};
}
inline OptSpec flag(std::string name, std::string help) {
    return {std::move(name), OptKind::Flag, Role::Param, false, false, std::move(help)};
}

inline const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> all = {
        {"build-testset",
         "Build the ground-truth-scored synthetic test set from excerpt annotations",
         {in("annotations", "annotation file"), out("out", "test set (JSONL)"),
          str("mode", "concat", "concat or fuse"), integer("budget", 8, "instances per article for the default grid"),
          str("grid", "", "explicit k_g:k_b targets, comma separated"),
          flag("include-unverified", "keep fused summaries that fail entailment verification"),
          str("generator", "", "model endpoint for key points and fusion"),
          str("verifier", "", "entailment scorer endpoint for fuse mode")},
         cmd_detail::build_testset},
        {"eval-metrics",
         "Correlation and winrate of metrics against test-set ground truth",
         {in("testset", "test set (JSONL)"), in("scores", "metric scores (JSONL); omit to score with configured metrics", false),
          in("annotations", "annotation file with article texts, for scoring", false),
          out("out", "report (JSON)"), out("table", "text table", false), out("scores-out", "computed scores (JSONL)", false),
          str("ties", "random", "metric tie handling: random or half"), integer("bootstrap", 500, "bootstrap resamples"),
          real("max-unscored", 0.1, "largest tolerated unscored fraction")},
         cmd_detail::eval_metrics},
        {"rank-methods",
         "Bradley-Terry ranking of methods with bootstrap intervals",
         {in("scores", "score table (JSON) or score records (JSONL)", false),
          in("summaries", "method summaries (JSONL) to score with --metric", false),
          in("pairs", "article pairs (JSON)", false), str("metric", "", "configured metric id used with --summaries"),
          out("out", "report (JSON)"), out("table", "text table", false), out("scores-out", "computed scores (JSONL)", false),
          integer("bootstrap", 500, "bootstrap resamples"), str("mode", "per_document", "per_document or aggregated"),
          real("max-unscored", 0.1, "largest tolerated unscored fraction")},
         cmd_detail::rank_methods},
        {"generate",
         "Summarize article pairs with zero_shot, self_refine or debate",
         {in("pairs", "article pairs (JSON)"), out("out", "summaries (JSONL)"), out("transcripts", "transcripts (JSONL)", false),
          str("method", "zero_shot", "zero_shot, self_refine or debate"), str("perspective", "both", "Left, Right or both"),
          integer("iterations", 3, "self_refine rounds"), integer("agents", 3, "debate agents"), integer("rounds", 3, "debate rounds"),
          str("generator", "", "model endpoint")},
         cmd_detail::generate},
        {"rerank",
         "Best-of-N generation scored by the judges or the ROUGE proxy",
         {in("pairs", "article pairs (JSON)"), out("out", "selections with candidate sets (JSONL)"),
          integer("n", 9, "candidates per input"), str("scorer", "judge", "judge or rouge_proxy"),
          str("weights", "0.5,0.5", "coverage,faithfulness weights"), str("perspective", "both", "Left, Right or both"),
          str("generator", "", "model endpoint"), str("judge", "", "judge endpoint")},
         cmd_detail::rerank},
        {"export-dpo",
         "Per-epoch preference pair files for an external DPO trainer",
         {in("pairs", "article pairs (JSON)"), out("out-dir", "export directory"),
          integer("train-size", 0, "seeded training subset size, 0 for all pairs"), integer("epochs", 10, "epochs"),
          integer("candidates", 3, "candidates per input"), real("margin", 0.05, "minimum score gap"),
          integer("pairs-per-input", 1, "pairs per input"), str("schedule", "", "epoch=endpoint list"),
          flag("reuse", "re-export epoch 0 candidates instead of regenerating"), str("scorer", "judge", "judge or rouge_proxy"),
          str("weights", "0.5,0.5", "coverage,faithfulness weights"), str("perspective", "both", "Left, Right or both"),
          str("generator", "", "default endpoint for every epoch"), str("judge", "", "judge endpoint")},
         cmd_detail::export_dpo},
        {"iaa",
         "Inter-annotator agreement with a random-annotator baseline",
         {in("annotations", "multi-annotator annotation file", false), in("items", "generic highlight items (JSON)", false),
          out("out", "report (JSON)"), real("tau", 0.5, "match threshold"), integer("trials", 1000, "baseline trials")},
         cmd_detail::iaa},
        {"abstractiveness",
         "Novel n-gram ratio and extractive fragment statistics",
         {in("summaries", "summaries (JSONL)"), in("pairs", "article pairs (JSON)"), out("out", "report (JSON)"),
          integer("ngram", 4, "n for the novel n-gram ratio")},
         cmd_detail::abstractiveness},
        {"human-scores",
         "Coverage, faithfulness and key point inclusion from human evaluation records",
         {in("records", "human evaluation records (JSON or JSONL)"), out("out", "report (JSON)")},
         cmd_detail::human_scores},
    };
    return all;
}

inline const CommandSpec& find_command(const std::string& name) {
    for (const auto& c : commands())
        if (c.name == name) return c;
    throw ConfigError("unknown command: " + name);
}

/// Runs `command` with an already-parsed config, parameters and output paths.
inline void execute(const std::string& command, const Json& config, const Json& params,
                    const std::map<std::string, std::string>& outputs) {
    const auto& spec = find_command(command);
    Context ctx;
    ctx.command = command;
    ctx.config = effective_config(config);
    ctx.params = params;
    ctx.outputs = outputs;
    Json inputs = Json::object();
    for (const auto& o : spec.opts) {
        if (o.role == Role::Output) {
            if (o.required && !ctx.output(o.name)) throw ConfigError("missing output --" + o.name);
            continue;
        }
        if (!ctx.params.contains(o.name)) ctx.params[o.name] = o.fallback;
        if (o.role == Role::Input && ctx.has(o.name)) {
            auto path = ctx.str(o.name);
            if (!std::filesystem::exists(path)) throw ConfigError("input not found: " + path);
            inputs[o.name] = sha256_hex(read_file(path));
        }
    }
    ctx.header = make_header(command, ctx.config, ctx.params, inputs);
    ctx.endpoints = modelio::EndpointRegistry::from_json(ctx.config);
    ctx.client = make_client(ctx.config);
    spec.run(ctx);
}

/// Re-runs the command recorded in an output's header, writing to new
/// output paths. Inputs must be unchanged.
inline void replay(const std::string& from, const std::map<std::string, std::string>& outputs) {
    auto h = read_header(from);
    if (optional_field<std::string>(h, "tool", "") != kToolName) throw ParseError(from + ": not written by " + kToolName);
    auto command = require<std::string>(h, "command", "header");
    const auto& params = h.at("params");
    for (auto it = h.at("inputs").begin(); it != h.at("inputs").end(); ++it) {
        auto path = params.at(it.key()).get<std::string>();
        if (!std::filesystem::exists(path) || sha256_hex(read_file(path)) != it.value().get<std::string>())
            throw IntegrityError("input --" + it.key() + " (" + path + ") differs from the recorded run");
    }
    execute(command, h.at("config"), params, outputs);
}

inline void print_error(const std::string& command, const char* kind, const std::string& message) {
    Json e{{"error", {{"kind", kind}, {"command", command}, {"message", message}}}};
    std::cerr << e.dump() << "\n";
}

inline int exit_code_for(std::string_view kind) {
    return kind == "config" || kind == "parse" || kind == "usage" ? 2 : 1;
}

inline int main(int argc, char** argv) {
    CLI::App app{"Perspective summarization evaluation and generation toolkit"};
    app.require_subcommand(1);
    struct Bound {
        std::string config, seed, jobs, cache_dir;
        std::map<std::string, std::string> values;
        std::map<std::string, bool> flags;
    };
    std::map<std::string, Bound> bound;
    for (const auto& c : commands()) {
        auto* sub = app.add_subcommand(c.name, c.help);
        auto& b = bound[c.name];
        sub->add_option("--config", b.config, "run config (JSON)");
        sub->add_option("--seed", b.seed, "override config seed");
        sub->add_option("--jobs", b.jobs, "override config jobs");
        sub->add_option("--cache-dir", b.cache_dir, "override config cache_dir");
        for (const auto& o : c.opts) {
            if (o.kind == OptKind::Flag) {
                sub->add_flag("--" + o.name, b.flags[o.name], o.help);
                continue;
            }
            auto* opt = sub->add_option("--" + o.name, b.values[o.name], o.help);
            if (o.required) opt->required();
        }
    }
    std::string replay_from;
    std::map<std::string, std::string> replay_out;
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in an output header");
    rp->add_option("--from", replay_from, "output file with a run header")->required();
    rp->add_option("--out", replay_out["out"], "new output path");
    rp->add_option("--out-dir", replay_out["out-dir"], "new output directory (export-dpo)");

    std::string command;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("", "usage", e.what());
        return 2;
    }
    try {
        if (rp->parsed()) {
            command = "replay";
            replay(replay_from, replay_out);
            return 0;
        }
        for (const auto& c : commands()) {
            if (!app.got_subcommand(c.name)) continue;
            command = c.name;
            const auto& b = bound.at(c.name);
            Json config = b.config.empty() ? Json::object() : read_json(b.config);
            try {
                if (!b.seed.empty()) config["seed"] = std::stoull(b.seed);
                if (!b.jobs.empty()) config["jobs"] = std::stoll(b.jobs);
            } catch (const std::logic_error&) {
                throw ConfigError("--seed and --jobs take integers");
            }
            if (!b.cache_dir.empty()) config["cache_dir"] = b.cache_dir;
            Json params = Json::object();
            std::map<std::string, std::string> outputs;
            for (const auto& o : c.opts) {
                if (o.kind == OptKind::Flag) {
                    params[o.name] = b.flags.at(o.name);
                    continue;
                }
                const auto& v = b.values.at(o.name);
                if (o.role == Role::Output) {
                    outputs[o.name] = v;
                    continue;
                }
                if (v.empty()) {
                    params[o.name] = o.fallback;
                    continue;
                }
                try {
                    if (o.kind == OptKind::Int) params[o.name] = std::stoll(v);
                    else if (o.kind == OptKind::Double) params[o.name] = std::stod(v);
                    else params[o.name] = v;
                } catch (const std::logic_error&) {
                    throw ConfigError("--" + o.name + " expects a number, got '" + v + "'");
                }
            }
            execute(c.name, config, params, outputs);
            return 0;
        }
    } catch (const Error& e) {
        print_error(command, e.kind(), e.what());
        return exit_code_for(e.kind());
    } catch (const Json::exception& e) {
        print_error(command, "parse", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error(command, "internal", e.what());
        return 1;
    }
    return 0;
}

} // namespace persum::cli
