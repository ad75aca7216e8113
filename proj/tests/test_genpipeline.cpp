#include <catch_amalgamated.hpp>

#include <filesystem>

#include "persum/genpipeline/dpo.hpp"
#include "persum/genpipeline/generate.hpp"
#include "persum/genpipeline/rerank.hpp"
#include "persum/modelio/mock.hpp"

using namespace persum;
using namespace persum::genpipeline;

namespace {

Json pair_json(const std::string& id) {
    return Json{{"pair_id", id},
                {"topic", "taxes"},
                {"left", {{"documents", {{{"doc_id", "l1"}, {"text", "Taxes fund schools. The rich should pay more. Public services matter."}}}}}},
                {"right", {{"documents", {{{"doc_id", "r1"}, {"text", "Taxes slow growth. Spending must fall. Markets allocate better."}}}}}}};
}

GenerationTask task(const std::string& target = "Left", std::uint64_t seed = 1) {
    return GenerationTask{article_pair_from_json(pair_json("p1")), target, seed};
}

modelio::ModelEndpoint mock_ep(const std::string& name = "gen", Json mock = Json::object()) {
    modelio::ModelEndpoint e;
    e.name = name;
    e.kind = "mock";
    e.mock = std::move(mock);
    return e;
}

Candidate cand(std::string text, std::optional<double> score) {
    Candidate c;
    c.summary = std::move(text);
    c.combined = score;
    return c;
}

} // namespace

TEST_CASE("article pairs parse and validate") {
    auto pairs = article_pairs_from_json({{"pairs", {pair_json("b"), pair_json("a")}}});
    CHECK(pairs[0].pair_id == "a");
    CHECK(pairs[0].side("Right").documents[0].doc_id == "r1");
    CHECK_THROWS_AS(article_pairs_from_json(Json::array({pair_json("a"), pair_json("a")})), IntegrityError);
    auto bad = pair_json("x");
    bad.erase("right");
    CHECK_THROWS_AS(article_pair_from_json(bad), ParseError);
    CHECK(task().input_id() == "p1/Left");
}

TEST_CASE("zero-shot enforces the perspective prefix") {
    modelio::MockClient client(2);
    auto ep = mock_ep();
    GenContext ctx{client, ep};
    for (std::string side : {"Left", "Right"}) {
        auto r = zero_shot(task(side), ctx);
        CHECK(r.summary.starts_with("The " + side + " "));
        CHECK_FALSE(r.flagged);
        CHECK(r.calls == 1);
    }
    auto right = zero_shot(task("Right"), ctx);
    bool from_right = right.summary.find("growth") != std::string::npos || right.summary.find("pending") != std::string::npos ||
                      right.summary.find("arkets") != std::string::npos;
    CHECK(from_right);

    auto wrong = mock_ep("bad", {{"mode", "constant"}, {"reply", "Summary: stuff"}});
    GenContext bctx{client, wrong, 3};
    auto r = zero_shot(task(), bctx);
    CHECK(r.flagged);
    CHECK(r.calls == 3);
}

TEST_CASE("multi-agent pipelines make the documented number of calls") {
    modelio::MockClient client(4);
    auto ep = mock_ep();
    GenContext ctx{client, ep};
    for (std::size_t n : {1, 2, 3}) {
        auto r = self_refine(task(), ctx, n);
        CHECK(r.calls == 2 * n + 1);
        CHECK(r.transcript.size() == 2 * n + 1);
        CHECK(r.summary.starts_with("The Left "));
    }
    for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 1}, {3, 3}, {4, 2}}) {
        auto r = debate(task("Right"), ctx, m, n);
        CHECK(r.calls == m + m * n + 1);
        CHECK(r.transcript.back().role == "aggregate");
        CHECK(r.summary.starts_with("The Right "));
    }
    auto a = debate(task(), ctx, 3, 2);
    auto b = debate(task(), ctx, 3, 2);
    CHECK(to_json(a) == to_json(b));
}

TEST_CASE("transport failure aborts with a partial transcript") {
    int calls = 0;
    modelio::FunctionClient flaky([&](const modelio::ModelEndpoint&, std::string_view, std::uint32_t) -> std::string {
        if (++calls > 2) throw TransportError("gone");
        return "The Left argues that x.";
    });
    auto ep = mock_ep();
    GenContext ctx{flaky, ep};
    try {
        self_refine(task(), ctx, 3);
        FAIL("expected abort");
    } catch (const GenerationAborted& e) {
        CHECK(e.transcript().size() == 2);
    }
}

TEST_CASE("rerank selects the argmax with seeded tie-breaks") {
    CandidateSet set;
    set.input_id = "x";
    set.seed = 9;
    set.candidates = {cand("a", 0.2), cand("b", 0.9), cand("c", std::nullopt), cand("d", 0.5)};
    select_best(set);
    CHECK(set.selected == 1);
    set.candidates = {cand("a", 0.5), cand("b", 0.5), cand("c", 0.1)};
    select_best(set);
    auto first = set.selected;
    CHECK(first < 2);
    select_best(set);
    CHECK(set.selected == first);
    set.candidates = {cand("a", std::nullopt), cand("b", std::nullopt), cand("c", 0.1)};
    CHECK_THROWS_AS(select_best(set), RerankError);
    set.candidates = {cand("same", 0.3), cand("same", 0.3)};
    select_best(set);
    CHECK(set.degenerate);
}

TEST_CASE("rerank with a length scorer prefers the longest candidate") {
    modelio::MockClient client(6);
    auto ep = mock_ep();
    GenContext ctx{client, ep};
    WeightedScorer length{"length", 1.0, [](const GenerationTask&, const std::string& s) {
                              judge::JudgeScore js;
                              js.normalized = static_cast<double>(s.size()) / 1000.0;
                              return js;
                          }};
    auto r = rerank(task(), ctx, 8, {length});
    std::size_t longest = 0;
    for (const auto& c : r.candidates.candidates) longest = std::max(longest, c.summary.size());
    CHECK(r.summary.size() == longest);
    auto r2 = rerank(task(), ctx, 8, {length}, 3);
    CHECK(to_json(r.candidates) == to_json(r2.candidates));
}

TEST_CASE("best-of-N is monotone over nested candidate sets") {
    modelio::MockClient client(3);
    auto ep = mock_ep();
    GenContext ctx{client, ep};
    std::optional<double> prev;
    for (std::size_t n = 1; n <= 8; ++n) {
        auto r = rerank_rouge_proxy(task(), ctx, n);
        auto best = *r.candidates.best().combined;
        if (prev) CHECK(best >= *prev);
        prev = best;
    }
}

TEST_CASE("judge scorers rate candidates against the target article") {
    modelio::MockClient client(8);
    auto ep = mock_ep("judge");
    GenContext ctx{client, ep};
    auto scorers = judge_scorers(client, ep, {}, 0.5, 0.5);
    auto r = rerank(task(), ctx, 3, scorers);
    for (const auto& c : r.candidates.candidates) {
        REQUIRE(c.combined);
        CHECK(*c.combined >= 0.0);
        CHECK(*c.combined <= 1.0);
        CHECK(c.scores.size() == 2);
    }
}

TEST_CASE("preference pairs take the largest qualifying gap") {
    auto rng = make_rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        PairingInput in;
        in.set.input_id = "i" + std::to_string(trial);
        std::size_t n = 2 + uniform_index(rng, 5);
        for (std::size_t k = 0; k < n; ++k) {
            std::optional<double> s;
            if (uniform_index(rng, 5) > 0) s = static_cast<double>(uniform_index(rng, 11)) / 10.0;
            in.set.candidates.push_back(cand("t" + std::to_string(uniform_index(rng, 4)), s));
        }
        PairingOptions opt;
        opt.margin = 0.15;
        std::size_t skipped = 0;
        auto pairs = build_preference_pairs({in}, opt, 0, &skipped);
        double best = -1;
        for (const auto& a : in.set.candidates)
            for (const auto& b : in.set.candidates)
                if (a.combined && b.combined && a.summary != b.summary && *a.combined - *b.combined >= 0.15)
                    best = std::max(best, *a.combined - *b.combined);
        if (best < 0) {
            CHECK(pairs.empty());
            CHECK(skipped == 1);
        } else {
            REQUIRE(pairs.size() == 1);
            CHECK(pairs[0].chosen_score - pairs[0].rejected_score == Catch::Approx(best));
            CHECK(pairs[0].chosen != pairs[0].rejected);
        }
    }
}

TEST_CASE("epoch loop writes one export per scheduled epoch") {
    auto dir = std::filesystem::temp_directory_path() / "persum_test_dpo";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    modelio::MockClient client(5);
    modelio::EndpointRegistry reg;
    reg.add(mock_ep("g0"));
    reg.add(mock_ep("g1"));
    EpochLoopConfig cfg;
    cfg.epochs = 3;
    cfg.candidates_per_input = 4;
    cfg.pairing.margin = 0.0;
    cfg.endpoint_schedule = {{0, "g0"}, {1, "g1"}, {2, "g1"}};
    std::vector<GenerationTask> tasks{task("Left", 1), task("Right", 2)};
    auto res = dpo_rr_epoch_loop(tasks, cfg, client, reg, {rouge_proxy_scorer()}, dir, {{"tool", "test"}});
    CHECK_FALSE(res.halted_at);
    REQUIRE(res.exports.size() == 3);
    for (const auto& ex : res.exports) {
        auto lines = read_jsonl(ex.path);
        REQUIRE(!lines.empty());
        CHECK(lines[0]["header"]["epoch"] == ex.epoch);
        CHECK(lines.size() == ex.pairs + 1);
        for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i]["chosen_score"].get<double>() >= lines[i]["rejected_score"].get<double>());
    }
    CHECK(read_jsonl(res.exports[1].path)[0]["header"]["endpoint"] == "g1");

    cfg.endpoint_schedule = {{0, "g0"}, {2, "g1"}};
    auto halted = dpo_rr_epoch_loop(tasks, cfg, client, reg, {rouge_proxy_scorer()}, dir / "h");
    CHECK(halted.halted_at == 1u);
    CHECK(halted.exports.size() == 1);
    cfg.endpoint_schedule = {{0, "nope"}};
    CHECK(dpo_rr_epoch_loop(tasks, cfg, client, reg, {rouge_proxy_scorer()}, dir / "h2").halted_at == 0u);
    cfg.candidates_per_input = 1;
    CHECK_THROWS_AS(dpo_rr_epoch_loop(tasks, cfg, client, reg, {rouge_proxy_scorer()}, dir), ParameterError);
    std::filesystem::remove_all(dir);
}
