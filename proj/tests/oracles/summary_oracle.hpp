#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace moleda::testing {

struct SummaryOracle {
    double min = 0, max = 0, mean = 0, std = 0, q1 = 0, median = 0, q3 = 0;
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> kde_x, kde_y;
    double whisker_lo = 0, whisker_hi = 0;
    std::size_t outliers = 0;
};

inline double naive_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const double lo = v[static_cast<std::size_t>(std::floor(h))];
    const double hi = v[static_cast<std::size_t>(std::ceil(h))];
    return lo + (h - std::floor(h)) * (hi - lo);
}

inline double gauss(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846); }

// Two plain passes: first moments and order statistics, then the derived quantities.
inline SummaryOracle summary_oracle(const std::vector<double>& v, std::size_t bins = 0) {
    SummaryOracle o;
    const double n = static_cast<double>(v.size());
    o.min = *std::min_element(v.begin(), v.end());
    o.max = *std::max_element(v.begin(), v.end());
    long double sum = 0;
    for (double x : v) sum += x;
    o.mean = static_cast<double>(sum / n);
    long double ss = 0;
    for (double x : v) ss += (x - o.mean) * (x - o.mean);
    o.std = std::sqrt(static_cast<double>(ss / n));
    o.q1 = naive_quantile(v, 0.25);
    o.median = naive_quantile(v, 0.5);
    o.q3 = naive_quantile(v, 0.75);
    const double iqr = o.q3 - o.q1;

    if (bins == 0) {
        if (iqr == 0) {
            bins = 20;
        } else {
            const double w = 2.0 * iqr / std::cbrt(n);
            bins = static_cast<std::size_t>(std::min(100.0, std::max(10.0, std::ceil((o.max - o.min) / w))));
        }
    }
    double lo = o.min, hi = o.max;
    if (lo == hi) lo -= 0.5, hi += 0.5;
    for (std::size_t b = 0; b <= bins; ++b) o.edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
    o.counts.assign(bins, 0);
    for (double x : v) {
        for (std::size_t b = 0; b < bins; ++b) {
            if (x >= o.edges[b] && (x < o.edges[b + 1] || b + 1 == bins)) {
                ++o.counts[b];
                break;
            }
        }
    }

    double h = (o.std > 0 && iqr > 0) ? 0.9 * std::min(o.std, iqr / 1.34) / std::pow(n, 0.2)
                                      : std::max(1e-9, 0.1 * (o.max - o.min));
    const std::size_t g = 128;
    const double a = o.min - 3 * h, step = (o.max - o.min + 6 * h) / (g - 1);
    for (std::size_t j = 0; j < g; ++j) {
        const double x = a + step * static_cast<double>(j);
        double d = 0;
        for (double s : v) {
            const double t = (s - a) / step;
            std::size_t k = static_cast<std::size_t>(t);
            if (k > g - 2) k = g - 2;
            const double f = t - static_cast<double>(k);
            d += (1 - f) * gauss((x - (a + step * k)) / h) + f * gauss((x - (a + step * (k + 1))) / h);
        }
        o.kde_x.push_back(x);
        o.kde_y.push_back(d / (n * h));
    }

    const double lf = o.q1 - 1.5 * iqr, hf = o.q3 + 1.5 * iqr;
    o.whisker_lo = o.max;
    o.whisker_hi = o.min;
    for (double x : v) {
        if (x < lf || x > hf) {
            ++o.outliers;
        } else {
            o.whisker_lo = std::min(o.whisker_lo, x);
            o.whisker_hi = std::max(o.whisker_hi, x);
        }
    }
    return o;
}

}  // namespace moleda::testing
