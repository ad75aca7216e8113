#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "persum/corpus/types.hpp"
#include "persum/metricbench/spearman.hpp"
#include "persum/metricbench/winrate.hpp"
#include "persum/util/io.hpp"

namespace persum::metricbench {

enum class Attribute { Coverage, Faithfulness };

inline const char* to_string(Attribute a) { return a == Attribute::Coverage ? "coverage" : "faithfulness"; }

struct BenchResult {
    std::string metric_id;
    Attribute attribute = Attribute::Coverage;
    double rho_s = 0.0;
    double p_value = 1.0;
    double winrate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_instances = 0;
    std::string error; // set when a statistic is undefined for this cell
};

/// Ground truth for one test-set instance plus its article tag.
struct TruthRow {
    std::string instance_id;
    std::string article; // topic/perspective
    double coverage = 0.0;
    double faithfulness = 0.0;
};

inline TruthRow truth_row(const corpus::SyntheticInstance& inst) {
    return {inst.instance_id, inst.topic + "/" + inst.perspective, corpus::to_double(inst.coverage),
            corpus::to_double(inst.faithfulness)};
}

/// scores[metric_id][instance_id] = normalized score.
using MetricScores = std::map<std::string, std::map<std::string, double>>;

/// Correlation and winrate of every metric against both attributes.
/// Instances a metric left unscored are dropped for that metric only.
inline std::vector<BenchResult> benchmark_metrics(const std::vector<TruthRow>& truth, const MetricScores& scores,
                                                  const WinrateOptions& opt) {
    std::vector<BenchResult> out;
    for (const auto& [metric_id, by_instance] : scores) {
        std::vector<double> m, cov, faith;
        std::vector<std::string> art;
        for (const auto& row : truth) {
            auto it = by_instance.find(row.instance_id);
            if (it == by_instance.end()) continue;
            m.push_back(it->second);
            cov.push_back(row.coverage);
            faith.push_back(row.faithfulness);
            art.push_back(row.article);
        }
        for (Attribute a : {Attribute::Coverage, Attribute::Faithfulness}) {
            BenchResult r;
            r.metric_id = metric_id;
            r.attribute = a;
            r.n_instances = m.size();
            const auto& gt = a == Attribute::Coverage ? cov : faith;
            try {
                auto c = spearman(m, gt);
                r.rho_s = c.rho;
                r.p_value = c.p_value;
                auto w = winrate(m, gt, art, opt);
                r.winrate = w.winrate;
                r.ci_lo = w.ci_lo;
                r.ci_hi = w.ci_hi;
                r.n_pairs = w.n_pairs;
            } catch (const Error& e) {
                r.error = e.what();
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline Json to_json(const BenchResult& r) {
    Json j{{"metric_id", r.metric_id},
           {"attribute", to_string(r.attribute)},
           {"rho_s", r.rho_s},
           {"p_value", r.p_value},
           {"stars", significance_stars(r.p_value)},
           {"winrate", r.winrate},
           {"winrate_ci95", {r.ci_lo, r.ci_hi}},
           {"n_pairs", r.n_pairs},
           {"n_instances", r.n_instances}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

namespace bench_detail {
inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}
inline std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}
} // namespace bench_detail

/// Plain-text table: metric rows, (correlation, winrate ± CI half-width)
/// per attribute.
inline std::string render_table(const std::vector<BenchResult>& results) {
    using namespace bench_detail;
    std::map<std::string, std::map<Attribute, const BenchResult*>> rows;
    std::vector<std::string> order;
    for (const auto& r : results) {
        if (!rows.contains(r.metric_id)) order.push_back(r.metric_id);
        rows[r.metric_id][r.attribute] = &r;
    }
    std::size_t w0 = 6;
    for (const auto& id : order) w0 = std::max(w0, id.size());
    std::ostringstream os;
    os << pad("Metric", w0) << " | " << pad("Coverage Corr.", 14) << " | " << pad("Coverage Winrate", 16) << " | "
       << pad("Faith. Corr.", 14) << " | " << "Faith. Winrate\n";
    os << std::string(w0, '-') << "-+-" << std::string(14, '-') << "-+-" << std::string(16, '-') << "-+-"
       << std::string(14, '-') << "-+-" << std::string(16, '-') << "\n";
    for (const auto& id : order) {
        os << pad(id, w0);
        for (Attribute a : {Attribute::Coverage, Attribute::Faithfulness}) {
            auto it = rows[id].find(a);
            std::string corr = "n/a", win = "n/a";
            if (it != rows[id].end() && it->second->error.empty()) {
                const auto& r = *it->second;
                corr = fmt("%.3f", r.rho_s) + significance_stars(r.p_value);
                win = fmt("%.3f", r.winrate) + " ± " + fmt("%.3f", 0.5 * (r.ci_hi - r.ci_lo));
            }
            os << " | " << pad(corr, 14) << " | " << (a == Attribute::Coverage ? pad(win, 16) : win);
        }
        os << "\n";
    }
    os << "Significance: * p<0.05, ** p<0.01, *** p<0.001. Random winrate baseline 0.500.\n";
    return os.str();
}

} // namespace persum::metricbench
