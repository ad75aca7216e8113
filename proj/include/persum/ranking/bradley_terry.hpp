#pragma once

// <resolv.h> (pulled in by the HTTP client) defines _res as a macro, which
// collides with an Eigen parameter name.
#pragma push_macro("_res")
#undef _res
#include <Eigen/Dense>
#pragma pop_macro("_res")

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persum/util/error.hpp"
#include "persum/util/log.hpp"
#include "persum/util/random.hpp"

namespace persum::ranking {

struct PairwiseOutcome {
    std::string winner;
    std::string loser;
    std::string document_id;
};

/// P[i beats j] = 1 / (1 + exp(-(θ_i - θ_j)/σ)).
inline double win_prob(double theta_i, double theta_j, double sigma = 1.0) {
    if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
    double z = (theta_i - theta_j) / sigma;
    // Evaluated on the side that cannot overflow; p(z) + p(-z) == 1 exactly
    // because both branches share the same exp term.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// Win counts: wins[i][j] = number of times method i beat method j.
struct WinMatrix {
    std::vector<std::string> methods; // sorted
    std::vector<std::vector<double>> wins;

    std::size_t size() const noexcept { return methods.size(); }
    std::size_t index_of(const std::string& m) const {
        auto it = std::lower_bound(methods.begin(), methods.end(), m);
        if (it == methods.end() || *it != m) throw ParameterError("unknown method: " + m);
        return static_cast<std::size_t>(it - methods.begin());
    }
};

inline WinMatrix tally(const std::vector<PairwiseOutcome>& outcomes, std::vector<std::string> methods = {}) {
    WinMatrix w;
    for (const auto& o : outcomes) {
        if (o.winner == o.loser) throw ParameterError("outcome has winner == loser (" + o.winner + ")");
        methods.push_back(o.winner);
        methods.push_back(o.loser);
    }
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    w.methods = std::move(methods);
    w.wins.assign(w.size(), std::vector<double>(w.size(), 0.0));
    for (const auto& o : outcomes) w.wins[w.index_of(o.winner)][w.index_of(o.loser)] += 1.0;
    return w;
}

/// Log-likelihood of the observed outcomes under abilities `theta`.
inline double log_likelihood(const WinMatrix& w, const std::vector<double>& theta, double sigma = 1.0) {
    double ll = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
            if (w.wins[i][j] > 0.0) ll += w.wins[i][j] * std::log(win_prob(theta[i], theta[j], sigma));
    return ll;
}

struct FitOptions {
    double sigma = 1.0;
    double gradient_tolerance = 1e-8;
    std::size_t max_iterations = 10000;
    double ability_cap = 30.0;
};

struct AbilityEstimate {
    std::vector<std::string> methods; // sorted
    std::vector<double> theta;        // sums to zero
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
    /// Some method won (or lost) every comparison path, so the likelihood has
    /// no finite maximizer; abilities were driven to the cap.
    bool capped = false;

    double ability(const std::string& m) const {
        auto it = std::lower_bound(methods.begin(), methods.end(), m);
        if (it == methods.end() || *it != m) throw ParameterError("unknown method: " + m);
        return theta[static_cast<std::size_t>(it - methods.begin())];
    }
};

namespace bt_detail {

/// Reachability closure over edges i -> j when i beat j at least once.
inline bool strongly_connected(const WinMatrix& w) {
    const auto n = w.size();
    auto reach_all = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                double c = forward ? w.wins[u][v] : w.wins[v][u];
                if (c > 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return n <= 1 || (reach_all(true) && reach_all(false));
}

inline bool weakly_connected(const WinMatrix& w) {
    const auto n = w.size();
    if (n <= 1) return true;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v) {
            if ((w.wins[u][v] + w.wins[v][u]) > 0.0 && !seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

inline void gradient_hessian(const WinMatrix& w, const std::vector<double>& theta, double sigma, Eigen::VectorXd& g,
                             Eigen::MatrixXd& neg_h) {
    const auto n = static_cast<Eigen::Index>(w.size());
    g.setZero(n);
    neg_h.setZero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double c = w.wins[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (c == 0.0) continue;
            double p = win_prob(theta[static_cast<std::size_t>(i)], theta[static_cast<std::size_t>(j)], sigma);
            double q = 1.0 - p;
            g(i) += c * q / sigma;
            g(j) -= c * q / sigma;
            double h = c * p * q / (sigma * sigma);
            neg_h(i, i) += h;
            neg_h(j, j) += h;
            neg_h(i, j) -= h;
            neg_h(j, i) -= h;
        }
    }
}

} // namespace bt_detail

/// Maximum-likelihood abilities under the sum-zero constraint, by damped
/// Newton steps on the concave log-likelihood. When the win graph is not
/// strongly connected the maximum is at infinity; the iteration then runs
/// until an ability reaches ±ability_cap and the estimate is flagged capped.
inline AbilityEstimate fit_bt(const WinMatrix& w, const FitOptions& opt = {}) {
    if (!(opt.sigma > 0.0)) throw ParameterError("sigma must be positive");
    const auto n = w.size();
    if (n < 2) throw FitError("need at least two methods");
    for (std::size_t i = 0; i < n; ++i) {
        double games = 0.0;
        for (std::size_t j = 0; j < n; ++j) games += w.wins[i][j] + w.wins[j][i];
        if (games == 0.0) throw FitError("method '" + w.methods[i] + "' has no outcomes");
    }
    if (!bt_detail::weakly_connected(w)) throw FitError("comparison graph is disconnected; abilities are not identifiable");
    const bool separated = !bt_detail::strongly_connected(w);

    AbilityEstimate est;
    est.methods = w.methods;
    est.theta.assign(n, 0.0);
    Eigen::VectorXd g;
    Eigen::MatrixXd neg_h;
    const Eigen::MatrixXd centering = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    double ll = log_likelihood(w, est.theta, opt.sigma);

    for (est.iterations = 0; est.iterations < opt.max_iterations; ++est.iterations) {
        bt_detail::gradient_hessian(w, est.theta, opt.sigma, g, neg_h);
        est.gradient_norm = g.norm();
        if (!separated && est.gradient_norm < opt.gradient_tolerance) {
            est.converged = true;
            break;
        }
        // Adding the rank-one centering term makes the system definite;
        // since g sums to zero, the step also sums to zero.
        Eigen::VectorXd d = (neg_h + centering).ldlt().solve(g);
        if (!d.allFinite()) throw FitError("Newton system is singular");

        double step_max = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double di = d(static_cast<Eigen::Index>(i));
            if (di > 0) step_max = std::min(step_max, (opt.ability_cap - est.theta[i]) / di);
            if (di < 0) step_max = std::min(step_max, (-opt.ability_cap - est.theta[i]) / di);
        }
        double alpha = std::min(1.0, step_max);
        bool hits_cap = step_max <= 1.0;
        std::vector<double> trial(n);
        double trial_ll = ll;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = est.theta[i] + alpha * d(static_cast<Eigen::Index>(i));
            trial_ll = log_likelihood(w, trial, opt.sigma);
            if (trial_ll >= ll) break;
            alpha *= 0.5;
            hits_cap = false;
        }
        if (trial_ll < ll) break; // no ascent possible at working precision
        est.theta = trial;
        ll = trial_ll;
        if (hits_cap) {
            est.capped = true;
            ++est.iterations;
            break;
        }
    }
    if (separated && !est.capped) {
        est.capped = true;
        log_warning("Bradley-Terry fit: data are separated but no ability reached the cap within the iteration limit");
    }
    double mean = 0.0;
    for (double t : est.theta) mean += t;
    mean /= static_cast<double>(n);
    for (double& t : est.theta) t -= mean;
    bt_detail::gradient_hessian(w, est.theta, opt.sigma, g, neg_h);
    est.gradient_norm = g.norm();
    est.log_likelihood = log_likelihood(w, est.theta, opt.sigma);
    for (double t : est.theta)
        if (!std::isfinite(t)) throw FitError("non-finite ability");
    return est;
}

inline AbilityEstimate fit_bt(const std::vector<PairwiseOutcome>& outcomes, const FitOptions& opt = {}) {
    return fit_bt(tally(outcomes), opt);
}

/// Raw scores, methods × documents; a missing cell is std::nullopt.
struct ScoreTable {
    std::vector<std::string> methods;
    std::vector<std::string> documents;
    std::vector<std::vector<std::optional<double>>> scores; // [method][document]

    void validate() const {
        if (methods.size() < 2) throw ParameterError("score table needs at least two methods");
        if (documents.empty()) throw ParameterError("score table needs at least one document");
        if (scores.size() != methods.size()) throw ParameterError("score table rows do not match methods");
        for (const auto& row : scores)
            if (row.size() != documents.size()) throw ParameterError("score table columns do not match documents");
    }
};

namespace bt_detail {
inline void compare(const std::string& a, const std::string& b, double sa, double sb, const std::string& doc, Rng& rng,
                    std::vector<PairwiseOutcome>& out) {
    bool a_wins = sa > sb || (sa == sb && coin_flip(rng));
    out.push_back(a_wins ? PairwiseOutcome{a, b, doc} : PairwiseOutcome{b, a, doc});
}
} // namespace bt_detail

/// One outcome per unordered method pair per document, exact ties settled by
/// a seeded coin flip. Pairs with a missing score are skipped and logged.
inline std::vector<PairwiseOutcome> outcomes_from_scores(const ScoreTable& t, Rng& rng,
                                                         std::span<const std::size_t> document_draw = {}) {
    t.validate();
    std::vector<std::size_t> all;
    if (document_draw.empty()) {
        for (std::size_t d = 0; d < t.documents.size(); ++d) all.push_back(d);
        document_draw = all;
    }
    std::vector<PairwiseOutcome> out;
    std::size_t skipped = 0;
    for (auto d : document_draw) {
        for (std::size_t i = 0; i < t.methods.size(); ++i) {
            for (std::size_t j = i + 1; j < t.methods.size(); ++j) {
                const auto& si = t.scores[i][d];
                const auto& sj = t.scores[j][d];
                if (!si || !sj) {
                    ++skipped;
                    continue;
                }
                bt_detail::compare(t.methods[i], t.methods[j], *si, *sj, t.documents[d], rng, out);
            }
        }
    }
    if (skipped > 0) log_warning("outcomes_from_scores: skipped " + std::to_string(skipped) + " comparisons with a missing score");
    return out;
}

inline std::vector<PairwiseOutcome> outcomes_from_scores(const ScoreTable& t, std::uint64_t seed) {
    auto rng = make_rng(seed);
    return outcomes_from_scores(t, rng);
}

/// One outcome per method pair, comparing each method's mean raw score over
/// the drawn documents (missing cells excluded from the mean).
inline std::vector<PairwiseOutcome> aggregated_outcomes(const ScoreTable& t, Rng& rng, std::span<const std::size_t> document_draw) {
    t.validate();
    std::vector<std::optional<double>> means(t.methods.size());
    for (std::size_t i = 0; i < t.methods.size(); ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto d : document_draw) {
            if (t.scores[i][d]) {
                sum += *t.scores[i][d];
                ++n;
            }
        }
        if (n > 0) means[i] = sum / static_cast<double>(n);
    }
    std::vector<PairwiseOutcome> out;
    for (std::size_t i = 0; i < t.methods.size(); ++i)
        for (std::size_t j = i + 1; j < t.methods.size(); ++j)
            if (means[i] && means[j]) bt_detail::compare(t.methods[i], t.methods[j], *means[i], *means[j], "aggregate", rng, out);
    return out;
}

} // namespace persum::ranking
