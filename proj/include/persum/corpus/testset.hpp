#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "persum/corpus/ingest.hpp"
#include "persum/corpus/keypoints.hpp"
#include "persum/corpus/types.hpp"
#include "persum/util/io.hpp"
#include "persum/util/log.hpp"
#include "persum/util/parallel.hpp"
#include "persum/util/random.hpp"

namespace persum::corpus {

struct GroundTruth {
    Ratio coverage;
    Ratio faithfulness;
};

/// coverage = k_g / |K|, faithfulness = k_g / (k_g + k_b), exactly.
inline GroundTruth score_composition(std::size_t k_g, std::size_t k_b, std::size_t total_relevant) {
    if (total_relevant == 0) throw ParameterError("total_relevant must be >= 1");
    if (k_g > total_relevant) throw ParameterError("k_g exceeds the number of relevant key points");
    if (k_g + k_b == 0) throw DegenerateCompositionError("k_g = k_b = 0: faithfulness is undefined");
    auto g = static_cast<std::int64_t>(k_g);
    return {Ratio(g, static_cast<std::int64_t>(total_relevant)), Ratio(g, g + static_cast<std::int64_t>(k_b))};
}

inline GroundTruth score_composition(const SummaryComposition& c, std::size_t total_relevant) {
    return score_composition(c.k_g(), c.k_b(), total_relevant);
}

inline constexpr std::string_view kConnectives[] = {"Additionally, ", "Moreover, ", "Furthermore, ", "Also, "};

/// Deterministic join: "A. Additionally, B. Moreover, C." Each key point
/// appears verbatim (a period is appended when it lacks end punctuation).
inline std::string concat_key_points(const std::vector<std::string>& texts) {
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string t = texts[i];
        if (t.empty()) continue;
        char last = t.back();
        if (last != '.' && last != '!' && last != '?') t.push_back('.');
        if (!out.empty()) {
            out.push_back(' ');
            out += kConnectives[(i - 1) % std::size(kConnectives)];
        }
        out += t;
    }
    return out;
}

/// Entailment probe used to verify fused summaries: score(context, claim).
using EntailmentCheck = std::function<double(std::string_view, std::string_view)>;

struct FusionOptions {
    modelio::ModelClient* client = nullptr;
    const modelio::ModelEndpoint* endpoint = nullptr;
    EntailmentCheck verifier;
    double entailment_threshold = 0.5;
};

struct ComposedSummary {
    std::string text;
    bool verified = true;
    std::vector<std::size_t> unentailed; // positions in the input list
};

inline ComposedSummary compose_summary(const std::string& topic, const std::vector<std::string>& texts, ComposeMode mode,
                                       const FusionOptions& fusion = {}, std::uint32_t sample_index = 0) {
    if (texts.empty()) throw DegenerateCompositionError("composition has no key points");
    if (mode == ComposeMode::Concat) return {concat_key_points(texts), true, {}};
    if (!fusion.client || !fusion.endpoint) throw ConfigError("fuse mode requires a model client");
    if (!fusion.verifier) throw ConfigError("fuse mode requires an entailment verifier");
    std::string lines;
    for (const auto& t : texts) lines += t + "\n";
    if (!lines.empty()) lines.pop_back();
    ComposedSummary out;
    auto prompt = modelio::render(modelio::prompt_id::kFuseKeyPoints, {{"topic", topic}, {"key_points", lines}});
    out.text = kp_detail::trim(fusion.client->complete(*fusion.endpoint, prompt, sample_index));
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (fusion.verifier(out.text, texts[i]) < fusion.entailment_threshold) out.unentailed.push_back(i);
    }
    out.verified = out.unentailed.empty();
    return out;
}

/// Article with its finished key point set, ready for test-set construction.
struct PreparedArticle {
    SourceArticle article;
    KeyPointSet key_points;
};

/// Fills in key points (paraphrasing and reversing through the model when the
/// annotation file did not carry them) and attaches each article's opposite
/// pool from the same topic's other perspective.
inline std::vector<PreparedArticle> prepare_articles(const std::vector<AnnotatedArticle>& annotated,
                                                     const ModelContext* ctx) {
    std::vector<PreparedArticle> out;
    for (const auto& aa : annotated) {
        PreparedArticle p{aa.article, {}};
        if (aa.key_points) {
            p.key_points = *aa.key_points;
        } else {
            if (!ctx) {
                throw ConfigError("article (" + aa.article.topic + ", " + aa.article.perspective +
                                  ") has no key points and no model endpoint is configured");
            }
            p.key_points.relevant = paraphrase_excerpts(aa.article, primary_excerpts(aa), *ctx);
            p.key_points.adversarial = generate_adversarial(p.key_points.relevant, *ctx);
        }
        out.push_back(std::move(p));
    }
    std::map<std::pair<std::string, std::string>, const PreparedArticle*> index;
    for (const auto& p : out) index[{p.article.topic, p.article.perspective}] = &p;
    for (auto& p : out) {
        p.key_points.opposite.clear();
        if (auto opp = opposite_perspective(p.article.perspective)) {
            if (auto it = index.find({p.article.topic, *opp}); it != index.end()) {
                for (const auto& k : it->second->key_points.relevant) p.key_points.opposite.push_back(k);
            }
        }
        p.key_points.validate();
    }
    return out;
}

struct TestsetConfig {
    /// Explicit (k_g, k_b) targets applied to every article. Empty selects
    /// the default grid k_g in 0..|K|, k_b in 0..2 minus (0,0), subsampled to
    /// per_article_budget.
    std::vector<std::pair<std::size_t, std::size_t>> grid;
    std::size_t per_article_budget = 8;
    ComposeMode mode = ComposeMode::Concat;
    bool include_unverified = false;
    std::size_t jobs = 1;
};

struct TestsetResult {
    std::vector<SyntheticInstance> instances;
    std::vector<std::string> skipped; // reasons, in article order
    std::size_t unverified = 0;
};

namespace testset_detail {

struct ArticleOutput {
    std::vector<SyntheticInstance> instances;
    std::vector<std::string> skipped;
    std::size_t unverified = 0;
};

inline ArticleOutput build_for_article(const PreparedArticle& pa, std::size_t article_index, const TestsetConfig& cfg,
                                       std::uint64_t seed, const FusionOptions& fusion) {
    ArticleOutput out;
    const auto& art = pa.article;
    auto label = "(" + art.topic + ", " + art.perspective + ")";
    std::vector<const KeyPoint*> relevant, adversarial, opposite;
    for (const auto& k : pa.key_points.relevant) {
        if (k.flagged) {
            out.skipped.push_back(label + ": relevant key point " + k.kp_id + " is flagged for review; article skipped");
            return out;
        }
        relevant.push_back(&k);
    }
    if (relevant.empty()) {
        out.skipped.push_back(label + ": no relevant key points");
        return out;
    }
    for (const auto& k : pa.key_points.adversarial) {
        if (!k.flagged) adversarial.push_back(&k);
    }
    for (const auto& k : pa.key_points.opposite) {
        if (!k.flagged) opposite.push_back(&k);
    }
    const std::size_t n_rel = relevant.size();
    const std::size_t n_bad = adversarial.size() + opposite.size();

    auto rng = make_rng(seed, article_index);
    std::vector<std::pair<std::size_t, std::size_t>> grid = cfg.grid;
    bool default_grid = grid.empty();
    if (default_grid) {
        for (std::size_t g = 0; g <= n_rel; ++g) {
            for (std::size_t b = 0; b <= 2; ++b) {
                if (g + b > 0) grid.emplace_back(g, b);
            }
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> feasible;
    for (auto [g, b] : grid) {
        if (g > n_rel || b > n_bad) {
            out.skipped.push_back(label + ": target (k_g=" + std::to_string(g) + ", k_b=" + std::to_string(b) +
                                  ") needs " + std::to_string(g) + " relevant / " + std::to_string(b) +
                                  " unfaithful key points but only " + std::to_string(n_rel) + " / " +
                                  std::to_string(n_bad) + " exist");
            continue;
        }
        if (g + b == 0) {
            out.skipped.push_back(label + ": target (0,0) is degenerate");
            continue;
        }
        feasible.emplace_back(g, b);
    }
    if (default_grid && feasible.size() > cfg.per_article_budget) {
        auto pick = sample_without_replacement(feasible.size(), cfg.per_article_budget, rng);
        std::sort(pick.begin(), pick.end());
        std::vector<std::pair<std::size_t, std::size_t>> sub;
        for (auto i : pick) sub.push_back(feasible[i]);
        feasible = std::move(sub);
    }

    std::size_t serial = 0;
    for (auto [g, b] : feasible) {
        SummaryComposition comp;
        comp.mode = cfg.mode;
        std::map<std::string, const KeyPoint*> by_id;
        for (auto i : sample_without_replacement(n_rel, g, rng)) {
            comp.included_relevant.push_back(relevant[i]->kp_id);
            by_id[relevant[i]->kp_id] = relevant[i];
        }
        std::vector<const KeyPoint*> adv_left = adversarial, opp_left = opposite;
        for (std::size_t slot = 0; slot < b; ++slot) {
            bool use_adv = coin_flip(rng);
            if (adv_left.empty()) use_adv = false;
            if (opp_left.empty()) use_adv = true;
            auto& pool = use_adv ? adv_left : opp_left;
            auto i = uniform_index(rng, pool.size());
            comp.included_bad.push_back(pool[i]->kp_id);
            by_id[pool[i]->kp_id] = pool[i];
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
        }
        comp.order = comp.included_relevant;
        comp.order.insert(comp.order.end(), comp.included_bad.begin(), comp.included_bad.end());
        seeded_shuffle(comp.order, rng);

        std::vector<std::string> texts;
        for (const auto& id : comp.order) texts.push_back(by_id.at(id)->text);

        SyntheticInstance inst;
        inst.instance_id = art.topic + "/" + art.perspective + "/" + std::to_string(serial++);
        inst.topic = art.topic;
        inst.perspective = art.perspective;
        inst.total_relevant = n_rel;
        auto gt = score_composition(comp, n_rel);
        inst.coverage = gt.coverage;
        inst.faithfulness = gt.faithfulness;
        auto composed = compose_summary(art.topic, texts, cfg.mode, fusion, static_cast<std::uint32_t>(serial));
        inst.summary_text = std::move(composed.text);
        inst.verified = composed.verified;
        inst.composition = std::move(comp);
        if (!inst.verified) {
            ++out.unverified;
            if (!cfg.include_unverified) {
                out.skipped.push_back(inst.instance_id + ": fused summary failed entailment verification");
                continue;
            }
        }
        out.instances.push_back(std::move(inst));
    }
    return out;
}

} // namespace testset_detail

/// Builds ground-truth-scored summaries for every article. Selection and
/// ordering depend only on `seed`; each article uses its own derived stream,
/// so per-article work can run in parallel and is merged in article order.
inline TestsetResult build_testset(const std::vector<PreparedArticle>& articles, const TestsetConfig& cfg,
                                   std::uint64_t seed, const FusionOptions& fusion = {}) {
    std::vector<testset_detail::ArticleOutput> parts(articles.size());
    parallel_for(articles.size(), cfg.jobs, [&](std::size_t i) {
        parts[i] = testset_detail::build_for_article(articles[i], i, cfg, seed, fusion);
    });
    TestsetResult res;
    for (auto& p : parts) {
        for (auto& inst : p.instances) res.instances.push_back(std::move(inst));
        for (auto& s : p.skipped) {
            log_warning("build_testset: " + s);
            res.skipped.push_back(std::move(s));
        }
        res.unverified += p.unverified;
    }
    return res;
}

inline Json to_json(const SyntheticInstance& inst) {
    return Json{{"instance_id", inst.instance_id},
                {"topic", inst.topic},
                {"perspective", inst.perspective},
                {"summary_text", inst.summary_text},
                {"k_g", inst.composition.k_g()},
                {"k_b", inst.composition.k_b()},
                {"total_relevant", inst.total_relevant},
                {"coverage", to_string(inst.coverage)},
                {"faithfulness", to_string(inst.faithfulness)},
                {"composition",
                 {{"relevant_ids", inst.composition.included_relevant},
                  {"bad_ids", inst.composition.included_bad},
                  {"order", inst.composition.order}}},
                {"mode", to_string(inst.composition.mode)},
                {"verified", inst.verified}};
}

inline SyntheticInstance instance_from_json(const Json& j) {
    const std::string where = "testset record";
    SyntheticInstance inst;
    inst.instance_id = require<std::string>(j, "instance_id", where);
    inst.topic = require<std::string>(j, "topic", where);
    inst.perspective = require<std::string>(j, "perspective", where);
    inst.summary_text = require<std::string>(j, "summary_text", where);
    inst.total_relevant = require<std::size_t>(j, "total_relevant", where);
    inst.coverage = parse_ratio(require<std::string>(j, "coverage", where));
    inst.faithfulness = parse_ratio(require<std::string>(j, "faithfulness", where));
    const auto comp = require<Json>(j, "composition", where);
    inst.composition.included_relevant = require<std::vector<std::string>>(comp, "relevant_ids", where);
    inst.composition.included_bad = require<std::vector<std::string>>(comp, "bad_ids", where);
    inst.composition.order = require<std::vector<std::string>>(comp, "order", where);
    inst.composition.mode = parse_compose_mode(require<std::string>(j, "mode", where));
    inst.verified = optional_field<bool>(j, "verified", true);
    if (require<std::size_t>(j, "k_g", where) != inst.composition.k_g() ||
        require<std::size_t>(j, "k_b", where) != inst.composition.k_b()) {
        throw IntegrityError(inst.instance_id + ": k_g/k_b disagree with the composition id lists");
    }
    return inst;
}

/// Recomputes ground truth from the composition; true when it matches the
/// stored values exactly.
inline bool ground_truth_consistent(const SyntheticInstance& inst) {
    auto gt = score_composition(inst.composition, inst.total_relevant);
    return gt.coverage == inst.coverage && gt.faithfulness == inst.faithfulness;
}

/// Seeded disjoint split: the first train_n shuffled ids go to train, the
/// next test_n to test.
inline DatasetSplit split_dataset(std::vector<std::string> pair_ids, std::size_t train_n, std::size_t test_n,
                                  std::uint64_t seed) {
    if (train_n + test_n > pair_ids.size()) {
        throw SizeError("split needs " + std::to_string(train_n + test_n) + " article pairs but only " +
                        std::to_string(pair_ids.size()) + " are available");
    }
    std::set<std::string> uniq(pair_ids.begin(), pair_ids.end());
    if (uniq.size() != pair_ids.size()) throw IntegrityError("duplicate article pair ids");
    auto rng = make_rng(seed);
    seeded_shuffle(pair_ids, rng);
    DatasetSplit s;
    s.seed = seed;
    s.train.assign(pair_ids.begin(), pair_ids.begin() + static_cast<std::ptrdiff_t>(train_n));
    s.test.assign(pair_ids.begin() + static_cast<std::ptrdiff_t>(train_n),
                  pair_ids.begin() + static_cast<std::ptrdiff_t>(train_n + test_n));
    return s;
}

} // namespace persum::corpus
