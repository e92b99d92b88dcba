#include "moleda/docstore/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moleda/error.hpp"

namespace moleda::docstore {

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InvalidArgument("empty_values", "quantile of no values");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::size_t auto_bins(std::span<const double> sorted) {
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    if (iqr <= 0.0) return kFallbackBins;
    const double width = 2.0 * iqr * std::pow(static_cast<double>(sorted.size()), -1.0 / 3.0);
    const double bins = std::ceil((sorted.back() - sorted.front()) / width);
    return static_cast<std::size_t>(std::clamp(bins, static_cast<double>(kMinAutoBins), static_cast<double>(kMaxAutoBins)));
}

std::vector<HistogramBin> histogram(std::span<const double> sorted, std::size_t bins) {
    if (bins == 0) throw InvalidArgument("invalid_bins", "histogram needs at least one bin");
    if (sorted.empty()) return {};
    double lo = sorted.front(), hi = sorted.back();
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + static_cast<double>(b) * width;
        out[b].right = b + 1 == bins ? hi : lo + static_cast<double>(b + 1) * width;
    }
    for (double v : sorted) {
        auto b = static_cast<std::size_t>(std::clamp(std::floor((v - lo) / width), 0.0, static_cast<double>(bins - 1)));
        // settle rounding at the edges so that left <= v < right holds exactly
        while (b > 0 && v < out[b].left) --b;
        while (b + 1 < bins && v >= out[b + 1].left) ++b;
        ++out[b].count;
    }
    return out;
}

double kde_bandwidth(std::span<const double> sorted, double std_dev) {
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    if (std_dev > 0.0 && iqr > 0.0) {
        return 0.9 * std::min(std_dev, iqr / 1.34) * std::pow(static_cast<double>(sorted.size()), -0.2);
    }
    return std::max(1e-9, 0.1 * (sorted.back() - sorted.front()));
}

std::vector<KdePoint> kde(std::span<const double> sorted, double h) {
    if (sorted.empty()) return {};
    const std::size_t g = kKdeGridPoints;
    const double a = sorted.front() - 3.0 * h;
    const double b = sorted.back() + 3.0 * h;
    const double step = (b - a) / static_cast<double>(g - 1);

    std::vector<double> weight(g, 0.0);
    for (double v : sorted) {
        const double t = (v - a) / step;
        const auto k = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(g - 2)));
        const double frac = std::clamp(t - static_cast<double>(k), 0.0, 1.0);
        weight[k] += 1.0 - frac;
        weight[k + 1] += frac;
    }

    const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    std::vector<KdePoint> out(g);
    for (std::size_t j = 0; j < g; ++j) {
        const double x = a + static_cast<double>(j) * step;
        double s = 0.0;
        for (std::size_t m = 0; m < g; ++m) {
            if (weight[m] == 0.0) continue;
            const double u = (x - (a + static_cast<double>(m) * step)) / h;
            s += weight[m] * std::exp(-0.5 * u * u);
        }
        out[j] = {x, s * norm};
    }
    return out;
}

Boxplot boxplot(std::span<const double> sorted) {
    Boxplot box;
    box.q1 = quantile(sorted, 0.25);
    box.median = quantile(sorted, 0.5);
    box.q3 = quantile(sorted, 0.75);
    const double reach = 1.5 * (box.q3 - box.q1);
    const double lo_fence = box.q1 - reach, hi_fence = box.q3 + reach;
    box.whisker_lo = box.q1;
    box.whisker_hi = box.q3;
    bool lo_set = false;
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            ++box.outliers;
            continue;
        }
        if (!lo_set) {
            box.whisker_lo = v;
            lo_set = true;
        }
        box.whisker_hi = v;
    }
    return box;
}

NumericSummary summarize_numbers(std::vector<double> values, std::optional<std::size_t> bins) {
    if (values.empty()) throw InvalidArgument("empty_values", "no numeric values to summarize");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());

    NumericSummary s;
    s.stats.min = values.front();
    s.stats.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.stats.mean = sum / n;
    double sq = 0.0;
    for (double v : values) sq += (v - s.stats.mean) * (v - s.stats.mean);
    s.stats.std = std::sqrt(sq / n);
    s.stats.q1 = quantile(values, 0.25);
    s.stats.median = quantile(values, 0.5);
    s.stats.q3 = quantile(values, 0.75);

    s.histogram = histogram(values, bins ? *bins : auto_bins(values));
    s.kde = kde(values, kde_bandwidth(values, s.stats.std));
    s.boxplot = boxplot(values);
    return s;
}

}  // namespace moleda::docstore
