#pragma once

#include "evorl/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace evorl {

enum class Alternative {
    two_sided,
    less,   // a tends to be smaller than b
    greater // a tends to be larger than b
};

enum class WilcoxonMethod { automatic, exact, normal };

struct WilcoxonResult
{
    double u = 0.0; // Mann-Whitney U of sample a (ties count one half)
    double p = 1.0;
    bool exact = false;
};

/// Wilcoxon rank-sum / Mann-Whitney U test. The automatic method enumerates
/// every rank arrangement when n_a + n_b <= 12 and otherwise uses the normal
/// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 Alternative alt = Alternative::two_sided,
                                 WilcoxonMethod method = WilcoxonMethod::automatic);

/// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> values);

/// Percentile bootstrap interval of the mean.
std::pair<double, double> bootstrap_ci(std::span<const double> samples, double level, std::size_t resamples,
                                       Rng& rng);

/// Quantile by linear interpolation between order statistics (h = (n - 1) q).
double quantile(std::vector<double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);

struct BoxStats
{
    std::size_t n = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double whisker_low = 0.0;  // most extreme datum >= q1 - 1.5 IQR
    double whisker_high = 0.0; // most extreme datum <= q3 + 1.5 IQR
    std::vector<double> outliers;

    double iqr() const { return q3 - q1; }
};

BoxStats box_stats(std::span<const double> samples);

struct Comparison
{
    std::string metric;
    std::string label_a, label_b;
    BoxStats a, b;
    WilcoxonResult test;
};

Comparison compare(std::span<const double> a, std::span<const double> b, std::string metric,
                   std::string label_a = "A", std::string label_b = "B");

/// Aligned text table for people.
std::string format_table(const Comparison& c);
/// `key = value` lines for scripts.
std::string format_summary(const Comparison& c);

} // namespace evorl
