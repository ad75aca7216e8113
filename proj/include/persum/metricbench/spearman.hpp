#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "persum/util/error.hpp"

namespace persum::metricbench {

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

struct Correlation {
    double rho = 0.0;
    double p_value = 1.0;
};

/// Spearman's rho as the Pearson correlation of average ranks, with a
/// two-sided p-value from the t approximation on n-2 degrees of freedom.
inline Correlation spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ParameterError("spearman: inputs differ in length");
    if (xs.size() < 3) throw ParameterError("spearman: need at least 3 observations");
    auto rx = average_ranks(xs), ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0; // ranks always average (n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        double dx = rx[i] - mean, dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("spearman: constant input, correlation undefined");
    Correlation c;
    c.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = n - 2.0;
    if (std::abs(c.rho) >= 1.0) {
        c.p_value = 0.0;
    } else {
        double t = c.rho * std::sqrt(df / (1.0 - c.rho * c.rho));
        boost::math::students_t dist(df);
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return c;
}

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, else "".
inline const char* significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

} // namespace persum::metricbench
