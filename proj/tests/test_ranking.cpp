#include <catch_amalgamated.hpp>

#include <cmath>

#include "persum/ranking/bootstrap.hpp"
#include "persum/ranking/bradley_terry.hpp"

using namespace persum;
using namespace persum::ranking;

namespace {

WinMatrix matrix(std::vector<std::string> methods, std::vector<std::vector<double>> wins) {
    return WinMatrix{std::move(methods), std::move(wins)};
}

// Zermelo / minorization-maximization iteration on strengths p = exp(theta).
std::vector<double> mm_fit(const WinMatrix& w) {
    const auto n = w.size();
    std::vector<double> p(n, 1.0);
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double won = 0, denom = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                won += w.wins[i][j];
                denom += (w.wins[i][j] + w.wins[j][i]) / (p[i] + p[j]);
            }
            next[i] = won / denom;
        }
        double g = 1;
        for (double x : next) g *= x;
        g = std::pow(g, 1.0 / static_cast<double>(n));
        for (auto& x : next) x /= g;
        p = next;
    }
    std::vector<double> theta;
    for (double x : p) theta.push_back(std::log(x));
    return theta;
}

ScoreTable table_from(std::vector<std::string> methods, std::size_t docs, const std::function<double(std::size_t, std::size_t)>& f) {
    ScoreTable t;
    t.methods = std::move(methods);
    for (std::size_t d = 0; d < docs; ++d) t.documents.push_back("doc" + std::to_string(d));
    t.scores.assign(t.methods.size(), std::vector<std::optional<double>>(docs));
    for (std::size_t m = 0; m < t.methods.size(); ++m)
        for (std::size_t d = 0; d < docs; ++d) t.scores[m][d] = f(m, d);
    return t;
}

} // namespace

TEST_CASE("win probability is logistic and symmetric") {
    CHECK(win_prob(0, 0) == 0.5);
    CHECK(win_prob(1, 0) == Catch::Approx(1 / (1 + std::exp(-1.0))));
    CHECK(win_prob(1, 0) + win_prob(0, 1) == Catch::Approx(1.0));
    CHECK(win_prob(2, 0, 2) == Catch::Approx(win_prob(1, 0)));
    CHECK(win_prob(-800, 800) >= 0.0);
    CHECK_THROWS_AS(win_prob(0, 0, 0), ParameterError);
}

TEST_CASE("Newton fit agrees with the MM iteration") {
    auto w = matrix({"a", "b", "c", "d"}, {{0, 7, 5, 9}, {3, 0, 6, 4}, {5, 4, 0, 8}, {1, 6, 2, 0}});
    auto est = fit_bt(w);
    auto oracle = mm_fit(w);
    CHECK(est.converged);
    CHECK_FALSE(est.capped);
    double sum = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(est.theta[i] == Catch::Approx(oracle[i]).margin(1e-6));
        sum += est.theta[i];
    }
    CHECK(std::abs(sum) < 1e-9);
    // The maximizer beats every nearby perturbation.
    for (std::size_t i = 0; i < 4; ++i)
        for (double h : {-0.01, 0.01}) {
            auto t = est.theta;
            t[i] += h;
            CHECK(log_likelihood(w, t) < est.log_likelihood);
        }
}

TEST_CASE("two-method fit has a closed form") {
    // p = 7/10 -> theta_a - theta_b = log(7/3).
    auto est = fit_bt(matrix({"a", "b"}, {{0, 7}, {3, 0}}));
    CHECK(est.ability("a") - est.ability("b") == Catch::Approx(std::log(7.0 / 3.0)).margin(1e-8));
    auto scaled = fit_bt(matrix({"a", "b"}, {{0, 7}, {3, 0}}), FitOptions{2.0});
    CHECK(scaled.ability("a") - scaled.ability("b") == Catch::Approx(2 * std::log(7.0 / 3.0)).margin(1e-7));
}

TEST_CASE("a clean sweep drives abilities to the cap") {
    auto est = fit_bt(matrix({"a", "b"}, {{0, 10}, {0, 0}}));
    CHECK(est.capped);
    CHECK(est.ability("a") > est.ability("b"));
    CHECK(std::abs(est.ability("a")) <= 30.0 + 1e-9);
    auto chain = fit_bt(matrix({"a", "b", "c"}, {{0, 3, 0}, {1, 0, 5}, {0, 0, 0}}));
    CHECK(chain.capped);
    CHECK(chain.ability("a") > chain.ability("b"));
    CHECK(chain.ability("b") > chain.ability("c"));
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(fit_bt(matrix({"a"}, {{0}})), FitError);
    CHECK_THROWS_AS(fit_bt(matrix({"a", "b", "c"}, {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}})), FitError);
    CHECK_THROWS_AS(fit_bt(matrix({"a", "b", "c", "d"}, {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 2}, {0, 0, 1, 0}})), FitError);
    CHECK_THROWS_AS(tally({{"a", "a", "d"}}), ParameterError);
}

TEST_CASE("abilities are recovered from simulated games") {
    std::vector<double> truth{1.0, 0.3, -0.2, -1.1};
    std::vector<std::string> names{"m0", "m1", "m2", "m3"};
    auto rng = make_rng(99);
    std::vector<PairwiseOutcome> games;
    for (int rep = 0; rep < 3000; ++rep)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) {
                double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
                bool i_wins = u < win_prob(truth[i], truth[j]);
                games.push_back(i_wins ? PairwiseOutcome{names[i], names[j], ""} : PairwiseOutcome{names[j], names[i], ""});
            }
    auto est = fit_bt(games);
    for (std::size_t i = 0; i < 4; ++i) CHECK(est.theta[i] == Catch::Approx(truth[i]).margin(0.08));
}

TEST_CASE("outcomes from scores") {
    auto t = table_from({"x", "y", "z"}, 4, [](std::size_t m, std::size_t d) { return m == 2 ? 0.5 : static_cast<double>(m + d); });
    t.scores[0][3].reset();
    auto out = outcomes_from_scores(t, 1);
    CHECK(out.size() == 3 * 4 - 2);
    for (const auto& o : out)
        if ((o.winner == "x" || o.loser == "x") && (o.winner == "y" || o.loser == "y")) CHECK(o.winner == "y");
    auto ties = table_from({"p", "q"}, 400, [](std::size_t, std::size_t) { return 1.0; });
    std::size_t p_wins = 0;
    for (const auto& o : outcomes_from_scores(ties, 3)) p_wins += o.winner == "p";
    CHECK(p_wins > 150);
    CHECK(p_wins < 250);
    CHECK(outcomes_from_scores(ties, 3).front().winner == outcomes_from_scores(ties, 3).front().winner);
}

TEST_CASE("bootstrap ranking is reproducible and orders methods") {
    auto rng = make_rng(8);
    auto t = table_from({"weak", "strong", "mid"}, 30, [&](std::size_t m, std::size_t) {
        double base = m == 1 ? 0.7 : m == 2 ? 0.5 : 0.3;
        return base + static_cast<double>(rng() % 1000) / 2500.0;
    });
    BootstrapOptions opt;
    opt.resamples = 200;
    opt.seed = 4;
    auto r1 = rank_with_bootstrap(t, opt);
    opt.jobs = 3;
    auto r2 = rank_with_bootstrap(t, opt);
    CHECK(to_json(r1) == to_json(r2));
    REQUIRE(r1.methods.size() == 3);
    CHECK(r1.methods[0].method == "strong");
    CHECK(r1.methods[1].method == "mid");
    CHECK(r1.methods[2].method == "weak");
    for (const auto& m : r1.methods) {
        CHECK(m.ci_lo <= m.mean_ability);
        CHECK(m.ci_hi >= m.mean_ability);
    }
    CHECK(r1.methods[0].rank == 1);
    opt.seed = 5;
    CHECK(to_json(rank_with_bootstrap(t, opt)) != to_json(r1));
    opt.mode = ComparisonMode::Aggregated;
    auto agg = rank_with_bootstrap(t, opt);
    CHECK(agg.methods[0].method == "strong");
    CHECK(render_table(agg).find("strong") != std::string::npos);
    CHECK(parse_comparison_mode("aggregated") == ComparisonMode::Aggregated);
    CHECK_THROWS_AS(parse_comparison_mode("x"), ParameterError);
}

TEST_CASE("score table JSON") {
    Json j{{"methods", {"a", "b"}}, {"documents", {"d1", "d2"}}, {"scores", {{"a", {{"d1", 0.2}, {"d2", nullptr}}}, {"b", {{"d1", 0.4}, {"d2", 0.1}}}}}};
    auto t = score_table_from_json(j);
    CHECK(t.scores[0][1] == std::nullopt);
    CHECK(t.scores[1][0] == 0.4);
    j["methods"] = {"a"};
    CHECK_THROWS(score_table_from_json(j));
}
