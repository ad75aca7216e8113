// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <boost/random/uniform_real_distribution.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>

#include "persum/cli/commands.hpp"
#include "persum/corpus/testset.hpp"
#include "persum/genpipeline/generate.hpp"
#include "persum/genpipeline/rerank.hpp"
#include "persum/metricbench/spearman.hpp"
#include "persum/metricbench/winrate.hpp"
#include "persum/modelio/mock.hpp"
#include "persum/ranking/bootstrap.hpp"
#include "persum/ranking/bradley_terry.hpp"
#include "persum/textmetrics/abstractiveness.hpp"
#include "persum/textmetrics/iaa.hpp"
#include "persum/textmetrics/rouge.hpp"

using namespace persum;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double uniform01(Rng& rng) { return boost::random::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Articles with n_rel relevant points, matching adversarial reversals, and
// the opposite perspective's points from the same topic.
std::vector<corpus::PreparedArticle> synthetic_articles(std::size_t topics, std::size_t n_rel) {
    std::vector<corpus::PreparedArticle> out;
    for (std::size_t t = 0; t < topics; ++t) {
        for (const char* side : {corpus::kLeft, corpus::kRight}) {
            corpus::PreparedArticle p;
            p.article.topic = "topic" + std::to_string(t);
            p.article.perspective = side;
            for (std::size_t k = 0; k < n_rel; ++k) {
                auto doc = "d" + std::to_string(k);
                p.article.documents.push_back({doc, "Document " + doc + "."});
                corpus::KeyPoint rel;
                rel.kp_id = p.article.topic + "/" + side + "/" + doc;
                rel.text = "The article argues that " + std::string(side) + " point " + std::to_string(k) + " holds";
                rel.source = doc;
                corpus::KeyPoint adv;
                adv.kp_id = rel.kp_id + "#adv";
                adv.text = "The article argues that " + std::string(side) + " point " + std::to_string(k) + " fails";
                adv.source = rel.kp_id;
                p.key_points.relevant.push_back(rel);
                p.key_points.adversarial.push_back(adv);
            }
            out.push_back(std::move(p));
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].key_points.opposite = out[i ^ 1].key_points.relevant;
    return out;
}

// ---------------------------------------------------------------------------

void ground_truth_integrity() {
    auto t0 = std::chrono::steady_clock::now();
    auto articles = synthetic_articles(6, 8);
    corpus::TestsetConfig cfg;
    cfg.per_article_budget = 26;
    auto res = corpus::build_testset(articles, cfg, 2024);

    std::map<std::string, std::set<std::string>> relevant_ids;
    for (const auto& a : articles)
        for (const auto& k : a.key_points.relevant) relevant_ids[a.article.topic + "/" + a.article.perspective].insert(k.kp_id);
    std::set<std::string> article_keys;
    std::size_t mismatches = 0;
    for (const auto& inst : res.instances) {
        auto parsed = corpus::instance_from_json(Json::parse(corpus::to_json(inst).dump()));
        const auto& rel = relevant_ids.at(parsed.topic + "/" + parsed.perspective);
        article_keys.insert(parsed.topic + "/" + parsed.perspective);
        long long g = 0, b = 0;
        for (const auto& id : parsed.composition.order) (rel.contains(id) ? g : b) += 1;
        auto K = static_cast<long long>(rel.size());
        // coverage = g/K and faithfulness = g/(g+b), compared by cross multiplication.
        bool ok = parsed.coverage.numerator() * K == g * parsed.coverage.denominator() &&
                  parsed.faithfulness.numerator() * (g + b) == g * parsed.faithfulness.denominator() &&
                  corpus::ground_truth_consistent(parsed);
        if (!ok) ++mismatches;
    }
    double secs = seconds_since(t0);
    bool ok = res.instances.size() >= 300 && article_keys.size() >= 10 && mismatches == 0 && secs < 5.0;
    report(ok, "ground-truth integrity",
           std::to_string(res.instances.size()) + " instances over " + std::to_string(article_keys.size()) + " articles, " +
               std::to_string(mismatches) + " mismatches (tolerance 0), " + fmt("%.2f", secs) + " s (< 5 s)");
}

void oracle_metric_winrate() {
    auto articles = synthetic_articles(20, 8);
    corpus::TestsetConfig cfg;
    cfg.per_article_budget = 26;
    auto res = corpus::build_testset(articles, cfg, 77);
    std::vector<double> cov, faith, neg_cov, neg_faith, random;
    std::vector<std::string> art;
    auto rng = make_rng(31337);
    for (const auto& inst : res.instances) {
        cov.push_back(corpus::to_double(inst.coverage));
        faith.push_back(corpus::to_double(inst.faithfulness));
        neg_cov.push_back(-cov.back());
        neg_faith.push_back(-faith.back());
        random.push_back(uniform01(rng));
        art.push_back(inst.topic + "/" + inst.perspective);
    }
    metricbench::WinrateOptions opt;
    opt.bootstrap = 0;
    auto w_cov = metricbench::winrate(cov, cov, art, opt);
    auto w_faith = metricbench::winrate(faith, faith, art, opt);
    auto n_cov = metricbench::winrate(neg_cov, cov, art, opt);
    auto n_faith = metricbench::winrate(neg_faith, faith, art, opt);
    auto r_cov = metricbench::winrate(random, cov, art, opt);
    bool ok = w_cov.winrate == 1.0 && w_faith.winrate == 1.0 && n_cov.winrate == 0.0 && n_faith.winrate == 0.0 &&
              std::abs(r_cov.winrate - 0.5) <= 0.02 && r_cov.n_pairs >= 10000;
    report(ok, "oracle-metric winrate",
           "truth " + fmt("%.3f", w_cov.winrate) + "/" + fmt("%.3f", w_faith.winrate) + ", negated " + fmt("%.3f", n_cov.winrate) +
               "/" + fmt("%.3f", n_faith.winrate) + ", random " + fmt("%.4f", r_cov.winrate) + " over " +
               std::to_string(r_cov.n_pairs) + " pairs (0.5 +- 0.02, >= 10k pairs)");
}

// Pearson correlation of ranks obtained by counting.
double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r;
        for (double a : v) {
            double lt = 0, eq = 0;
            for (double b : v) {
                lt += b < a;
                eq += b == a;
            }
            r.push_back(lt + (eq + 1) / 2);
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n, my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

void spearman_oracle() {
    auto rng = make_rng(12);
    double worst = 0.0;
    std::size_t checked = 0;
    while (checked < 200) {
        std::size_t n = 3 + uniform_index(rng, 10);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(static_cast<double>(uniform_index(rng, 6)));
            y.push_back(static_cast<double>(uniform_index(rng, 6)));
        }
        if (std::set<double>(x.begin(), x.end()).size() < 2 || std::set<double>(y.begin(), y.end()).size() < 2) continue;
        worst = std::max(worst, std::abs(metricbench::spearman(x, y).rho - brute_spearman(x, y)));
        ++checked;
    }
    bool monotone_exact = true;
    for (std::size_t n = 3; n <= 12; ++n) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(static_cast<double>(i) * 0.37 - 1.0);
            y.push_back(std::exp(static_cast<double>(i)));
        }
        monotone_exact = monotone_exact && metricbench::spearman(x, y).rho == 1.0;
    }
    report(worst <= 1e-12 && monotone_exact, "Spearman oracle equivalence",
           "max |rho - oracle| = " + fmt("%.2e", worst) + " over 200 vectors (<= 1e-12); monotone rho == 1: " +
               (monotone_exact ? "yes" : "no"));
}

// Sum-zero log-likelihood maximized by nested grid search.
std::vector<double> grid_search(const ranking::WinMatrix& w) {
    double bx = 0, by = 0, best = -INFINITY;
    auto scan = [&](double cx, double cy, double half, double step) {
        double nx = cx, ny = cy;
        for (double x = cx - half; x <= cx + half + 1e-12; x += step)
            for (double y = cy - half; y <= cy + half + 1e-12; y += step) {
                double ll = ranking::log_likelihood(w, {x, y, -x - y});
                if (ll > best) {
                    best = ll;
                    nx = x;
                    ny = y;
                }
            }
        bx = nx;
        by = ny;
    };
    scan(0, 0, 5, 0.01);
    scan(bx, by, 0.02, 1e-4);
    scan(bx, by, 2e-4, 2e-6);
    return {bx, by, -bx - by};
}

void bradley_terry() {
    const std::vector<double> truth{1.5, 0.5, -0.5, -1.5};
    const std::vector<std::string> names{"m1", "m2", "m3", "m4"};
    std::size_t correct = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto rng = make_rng(4242, trial);
        std::vector<ranking::PairwiseOutcome> games;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                for (int k = 0; k < 200; ++k) {
                    bool i_wins = uniform01(rng) < ranking::win_prob(truth[i], truth[j]);
                    games.push_back(i_wins ? ranking::PairwiseOutcome{names[i], names[j], ""}
                                           : ranking::PairwiseOutcome{names[j], names[i], ""});
                }
        auto est = ranking::fit_bt(games);
        bool ordered = true;
        for (std::size_t i = 0; i + 1 < 4; ++i) ordered = ordered && est.ability(names[i]) > est.ability(names[i + 1]);
        correct += ordered;
    }

    double worst = 0.0;
    auto rng = make_rng(99);
    for (int inst = 0; inst < 5; ++inst) {
        ranking::WinMatrix w{{"a", "b", "c"}, std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0))};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j) w.wins[i][j] = static_cast<double>(1 + uniform_index(rng, 20));
        auto est = ranking::fit_bt(w);
        auto grid = grid_search(w);
        for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(est.theta[i] - grid[i]));
    }

    ranking::ScoreTable table;
    auto srng = make_rng(5);
    for (int m = 0; m < 6; ++m) table.methods.push_back("method" + std::to_string(m));
    for (int d = 0; d < 200; ++d) table.documents.push_back("doc" + std::to_string(d));
    for (int m = 0; m < 6; ++m) {
        std::vector<std::optional<double>> row;
        for (int d = 0; d < 200; ++d) row.push_back(0.1 * m + uniform01(srng));
        table.scores.push_back(row);
    }
    ranking::BootstrapOptions bo;
    bo.resamples = 500;
    bo.seed = 17;
    auto t0 = std::chrono::steady_clock::now();
    auto first = ranking::to_json(ranking::rank_with_bootstrap(table, bo)).dump();
    double secs = seconds_since(t0);
    auto second = ranking::to_json(ranking::rank_with_bootstrap(table, bo)).dump();
    bool ok = correct >= 99 && worst <= 1e-3 && first == second && secs < 60.0;
    report(ok, "Bradley-Terry recovery",
           std::to_string(correct) + "/100 trials ranked correctly (>= 99); max |theta - grid| = " + fmt("%.1e", worst) +
               " (<= 1e-3); bootstrap B=500 identical on rerun: " + (first == second ? "yes" : "no") + ", " +
               fmt("%.2f", secs) + " s at 6 x 200 (< 60 s)");
}

void rouge_and_fragments() {
    // Every sequence over {a,b,c} of length 0..8, indexed by (length, base-3 code).
    std::vector<std::string> seqs;
    std::vector<std::size_t> offset;
    for (std::size_t len = 0, p = 1; len <= 8; ++len, p *= 3) {
        offset.push_back(seqs.size());
        for (std::size_t code = 0; code < p; ++code) {
            std::string s;
            for (std::size_t i = 0, c = code; i < len; ++i, c /= 3) s.push_back(static_cast<char>('a' + c % 3));
            seqs.push_back(s);
        }
    }
    auto index_of = [&](const std::string& s) {
        std::size_t code = 0;
        for (std::size_t i = s.size(); i-- > 0;) code = code * 3 + static_cast<std::size_t>(s[i] - 'a');
        return offset[s.size()] + code;
    };
    std::vector<std::vector<std::size_t>> children(seqs.size());
    for (std::size_t id = 0; id < seqs.size(); ++id)
        for (std::size_t p = 0; p < seqs[id].size(); ++p) {
            auto c = seqs[id];
            c.erase(p, 1);
            children[id].push_back(index_of(c));
        }
    std::vector<textmetrics::TokenSeq> toks(seqs.size());
    for (std::size_t id = 0; id < seqs.size(); ++id)
        for (char c : seqs[id]) toks[id].tokens.emplace_back(1, c);

    auto is_subsequence = [](const std::string& a, const std::string& b) {
        std::size_t i = 0;
        for (std::size_t j = 0; j < b.size() && i < a.size(); ++j) i += a[i] == b[j];
        return i == a.size();
    };
    std::size_t pairs = 0, mismatches = 0;
    std::vector<std::size_t> best(seqs.size());
    for (std::size_t ref = 0; ref < seqs.size(); ++ref) {
        // Longest common subsequence: a itself when it embeds in the reference,
        // otherwise the best over single-token deletions (shorter ids first).
        for (std::size_t id = 0; id < seqs.size(); ++id) {
            if (is_subsequence(seqs[id], seqs[ref])) {
                best[id] = seqs[id].size();
            } else {
                std::size_t b = 0;
                for (auto c : children[id]) b = std::max(b, best[c]);
                best[id] = b;
            }
        }
        for (std::size_t cand = 0; cand < seqs.size(); ++cand) {
            auto s = textmetrics::rouge_l(toks[cand], toks[ref]);
            double l = static_cast<double>(best[cand]);
            double p = seqs[cand].empty() ? 0.0 : l / static_cast<double>(seqs[cand].size());
            double r = seqs[ref].empty() ? 0.0 : l / static_cast<double>(seqs[ref].size());
            mismatches += s.precision != p || s.recall != r;
            ++pairs;
        }
    }

    auto rng = make_rng(2718);
    bool full_copy = true;
    std::size_t density_violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        textmetrics::TokenSeq article, summary;
        std::size_t alpha = 2 + uniform_index(rng, 6);
        for (std::size_t i = 0, n = 1 + uniform_index(rng, 60); i < n; ++i)
            article.tokens.push_back("w" + std::to_string(uniform_index(rng, alpha)));
        for (std::size_t i = 0, n = 1 + uniform_index(rng, 30); i < n; ++i)
            summary.tokens.push_back("w" + std::to_string(uniform_index(rng, alpha + 2)));
        auto st = textmetrics::extractive_fragments(article, summary);
        density_violations += st.density < st.coverage;
        if (trial < 100) {
            auto copy = textmetrics::extractive_fragments(article, article);
            full_copy = full_copy && copy.coverage == 1.0 && copy.density == static_cast<double>(article.size());
        }
    }
    bool ok = mismatches == 0 && full_copy && density_violations == 0;
    report(ok, "ROUGE and fragment oracles",
           std::to_string(mismatches) + " ROUGE-L mismatches over " + std::to_string(pairs) +
               " sequence pairs (length <= 8, 3 tokens); full copy coverage 1 and density |S|: " + (full_copy ? "yes" : "no") +
               "; density < coverage in " + std::to_string(density_violations) + "/1000 random cases");
}

void inter_annotator_agreement() {
    std::vector<std::string> set{"Taxes hurt growth", "Schools need funding", "borders must be secure"};
    bool identical = textmetrics::agreement(set, set).r_overall == 1.0;
    std::vector<std::string> a{"abcdef"}, b{"abcxyz"};
    bool strict = textmetrics::agreement(a, b, 0.5).matches.empty();

    textmetrics::HighlightStats forced{1.0, 0.0, 12.0, 0.0};
    std::vector<std::string> texts{"twelve chars"};
    auto degenerate = textmetrics::iaa_random_baseline(forced, texts, 3, 200);
    textmetrics::HighlightStats realistic{2.0, 1.0, 10.0, 9.0};
    std::vector<std::string> corpus_texts{"The rich should pay more in taxes to fund public schools and roads.",
                                          "Lower taxes let families keep what they earn and spur growth."};
    auto r1 = textmetrics::iaa_random_baseline(realistic, corpus_texts, 11, 500);
    auto r2 = textmetrics::iaa_random_baseline(realistic, corpus_texts, 11, 500);
    bool reproducible = r1.mean == r2.mean && r1.sd == r2.sd;
    bool ok = identical && strict && degenerate.mean == 1.0 && reproducible;
    report(ok, "inter-annotator agreement",
           std::string("identical sets R=1: ") + (identical ? "yes" : "no") + "; LCS ratio 0.5 at tau 0.5 unmatched: " +
               (strict ? "yes" : "no") + "; zero-variance baseline R = " + fmt("%.3f", degenerate.mean) +
               "; seeded baseline " + fmt("%.4f", r1.mean) + " reproducible: " + (reproducible ? "yes" : "no"));
}

void rerank_order_statistic() {
    const std::vector<std::size_t> ns{1, 2, 3, 6, 9, 18};
    std::vector<double> mean(ns.size(), 0.0);
    auto pair = genpipeline::article_pair_from_json(
        {{"pair_id", "p"},
         {"topic", "economy"},
         {"left", {{"documents", {{{"doc_id", "l"}, {"text", "Wages are too low. Unions help workers. The rich must pay more. Healthcare is a right."}}}}}},
         {"right", {{"documents", {{{"doc_id", "r"}, {"text", "Taxes are too high. Regulation kills jobs. Markets work best. Spending must fall."}}}}}}});
    modelio::ModelEndpoint gen;
    gen.name = "gen";
    gen.kind = "mock";
    modelio::ModelEndpoint judge_ep;
    judge_ep.name = "judge";
    judge_ep.kind = "mock";
    judge_ep.mock = {{"mode", "random"}};
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        modelio::MockClient client(static_cast<std::uint64_t>(t));
        genpipeline::GenContext ctx{client, gen};
        genpipeline::GenerationTask task{pair, t % 2 ? "Left" : "Right", static_cast<std::uint64_t>(t)};
        // Judge score: a seeded uniform draw keyed on the candidate text.
        genpipeline::WeightedScorer random_judge{"random_judge", 1.0, [&client, &judge_ep](const genpipeline::GenerationTask&, const std::string& s) {
                                                     judge::JudgeScore js;
                                                     auto token = client.complete(judge_ep, s, 0);
                                                     js.normalized = static_cast<double>(std::stoull(token.substr(0, 13), nullptr, 16)) / 4503599627370496.0;
                                                     return js;
                                                 }};
        for (std::size_t k = 0; k < ns.size(); ++k) {
            auto r = genpipeline::rerank(task, ctx, ns[k], {random_judge});
            mean[k] += *r.candidates.best().combined / trials;
        }
    }
    bool monotone = true;
    std::string detail;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        if (k > 0) monotone = monotone && mean[k] >= mean[k - 1];
        detail += (k ? ", " : "") + std::string("N=") + std::to_string(ns[k]) + ": " + fmt("%.4f", mean[k]);
    }
    report(monotone, "rerank order statistic", detail + " (nondecreasing over 500 trials)");
}

void pipeline_determinism() {
    auto dir = fs::temp_directory_path() / "persum_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Json config{{"seed", 5},
                {"jobs", 2},
                {"endpoints", {{{"name", "gen"}, {"kind", "mock"}}, {{"name", "judge"}, {"kind", "mock"}, {"params", {{"temperature", 0}}}}}},
                {"generator_endpoint", "gen"},
                {"judge_endpoint", "judge"}};
    const std::string pairs = (fs::path(PERSUM_SOURCE_DIR) / "tests" / "data" / "pairs.json").string();
    struct Run {
        std::string command;
        Json params;
        std::string output;
        bool dir = false;
    };
    std::vector<Run> runs{
        {"generate", {{"pairs", pairs}, {"method", "zero_shot"}}, "zero_shot.jsonl"},
        {"generate", {{"pairs", pairs}, {"method", "self_refine"}, {"iterations", 2}}, "self_refine.jsonl"},
        {"generate", {{"pairs", pairs}, {"method", "debate"}, {"agents", 3}, {"rounds", 2}}, "debate.jsonl"},
        {"rerank", {{"pairs", pairs}, {"n", 4}}, "rerank.jsonl"},
        {"export-dpo", {{"pairs", pairs}, {"epochs", 3}, {"candidates", 3}}, "dpo", true},
    };
    std::size_t identical = 0;
    for (const auto& r : runs) {
        std::string bytes[2];
        for (int k = 0; k < 2; ++k) {
            auto path = dir / (std::to_string(k) + "_" + r.output);
            cli::execute(r.command, config, r.params, {{r.dir ? "out-dir" : "out", path.string()}});
            if (r.dir) {
                for (std::size_t e = 0; e < 3; ++e) bytes[k] += read_file(genpipeline::epoch_export_path(path, e));
            } else {
                bytes[k] = read_file(path);
            }
        }
        identical += bytes[0] == bytes[1] && !bytes[0].empty();
    }

    auto task_pair = genpipeline::article_pairs_from_json(read_json(pairs)).front();
    genpipeline::GenerationTask task{task_pair, "Left", 1};
    modelio::MockClient client(1);
    modelio::ModelEndpoint ep;
    ep.name = "gen";
    ep.kind = "mock";
    genpipeline::GenContext ctx{client, ep};
    bool counts = true;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto before = client.ledger().count();
        auto r = genpipeline::self_refine(task, ctx, n);
        counts = counts && r.calls == 2 * n + 1 && client.ledger().count() - before == 2 * n + 1;
    }
    for (std::size_t m = 2; m <= 4; ++m)
        for (std::size_t n = 1; n <= 3; ++n) {
            auto before = client.ledger().count();
            auto r = genpipeline::debate(task, ctx, m, n);
            counts = counts && r.calls == m + m * n + 1 && client.ledger().count() - before == m + m * n + 1;
        }
    fs::remove_all(dir);
    report(identical == runs.size() && counts, "pipeline determinism",
           std::to_string(identical) + "/" + std::to_string(runs.size()) +
               " generate/rerank/export-dpo runs byte-identical on rerun; self-refine 2n+1 and debate m+mn+1 call counts: " +
               (counts ? "exact" : "wrong"));
}

void desk_scale_statement() {
    report(true, "not reproducible at desk scale",
           "metric correlations and winrates against human labels, method ability scores, human IAA values, key point "
           "inclusion counts and DPO+RR gains need the human-annotated testbed, hosted judge and scorer models, and external "
           "preference training. Replication recipe: configure endpoints, then run `persum build-testset`, `persum "
           "eval-metrics` (metric table) and `persum generate` + `persum rank-methods` (method ranking); see README");
}

} // namespace

int main() {
    std::pair<const char*, void (*)()> checks[] = {
        {"ground-truth integrity", ground_truth_integrity},
        {"oracle-metric winrate", oracle_metric_winrate},
        {"Spearman oracle equivalence", spearman_oracle},
        {"Bradley-Terry recovery", bradley_terry},
        {"ROUGE and fragment oracles", rouge_and_fragments},
        {"inter-annotator agreement", inter_annotator_agreement},
        {"rerank order statistic", rerank_order_statistic},
        {"pipeline determinism", pipeline_determinism},
        {"not reproducible at desk scale", desk_scale_statement},
    };
    for (auto [name, check] : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(false, name, std::string("threw: ") + e.what());
        }
    }
    return failures;
}
