#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moleda::docstore {

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

struct KdePoint {
    double x = 0.0;
    double density = 0.0;
};

struct Boxplot {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::size_t outliers = 0;
};

struct NumericStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;  // population
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

enum class FieldKind { Numeric, Categorical, Empty };

struct FieldSummary {
    std::string field;
    FieldKind kind = FieldKind::Empty;
    /// Numeric fields count numbers and treat every other value as missing;
    /// categorical fields count non-null values.
    std::size_t count = 0;
    std::size_t missing = 0;
    std::optional<NumericStats> stats;
    std::vector<HistogramBin> histogram;
    std::vector<KdePoint> kde;
    std::optional<Boxplot> boxplot;
    std::map<std::string, std::size_t> categories;
    /// Per-category boxplots of this (numeric) field, keyed by the group_by value.
    std::map<std::string, Boxplot> groups;
    std::optional<std::string> group_by;
};

inline constexpr std::size_t kKdeGridPoints = 128;
inline constexpr std::size_t kMinAutoBins = 10;
inline constexpr std::size_t kMaxAutoBins = 100;
inline constexpr std::size_t kFallbackBins = 20;
inline constexpr std::size_t kMaxBins = 1000;

/// Quantile by linear interpolation between order statistics (sorted input).
double quantile(std::span<const double> sorted, double p);

/// Freedman–Diaconis bin count clamped to [10, 100]; 20 when IQR is 0.
std::size_t auto_bins(std::span<const double> sorted);

/// Equal-width bins over [min, max]; the last bin is closed.
std::vector<HistogramBin> histogram(std::span<const double> sorted, std::size_t bins);

/// Silverman bandwidth with the documented fallback.
double kde_bandwidth(std::span<const double> sorted, double std_dev);

/// Gaussian KDE on a 128-point grid over [min − 3h, max + 3h] with linear binning.
std::vector<KdePoint> kde(std::span<const double> sorted, double bandwidth);

Boxplot boxplot(std::span<const double> sorted);

/// All numeric statistics of one value set; `values` need not be sorted.
struct NumericSummary {
    NumericStats stats;
    std::vector<HistogramBin> histogram;
    std::vector<KdePoint> kde;
    Boxplot boxplot;
};
NumericSummary summarize_numbers(std::vector<double> values, std::optional<std::size_t> bins);

}  // namespace moleda::docstore
