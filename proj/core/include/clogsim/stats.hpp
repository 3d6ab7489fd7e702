// stats.hpp - small statistics toolkit used by the harness and tests.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clogsim::stats {

// Linear-interpolation quantile (numpy's default, "type 7") of unsorted data.
// Throws std::invalid_argument on empty input or q outside [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct Proportion {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double standard_error = 0.0;  // sqrt(p(1-p)/N) at the point estimate
    double ci_low = 0.0;          // Wilson score interval
    double ci_high = 1.0;
};

Proportion proportion(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

// Two-sample chi-square test of homogeneity over shared categories.
// Categories whose pooled expected count falls below min_expected in either
// sample are merged into one bucket before the statistic is formed.
struct ChiSquareResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    int merged_categories = 0;
};

using Histogram = std::map<std::string, std::uint64_t>;

ChiSquareResult chi_square_homogeneity(const Histogram& a, const Histogram& b, double min_expected = 5.0);

// Total-variation distance between the empirical distributions.
double total_variation(const Histogram& a, const Histogram& b);

// Goodness of fit of observed counts against expected probabilities.
ChiSquareResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                           std::span<const double> probabilities);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
    std::optional<double> slope_stderr;   // needs >= 3 points
    std::optional<double> slope_ci_low;   // 95% Student-t interval
    std::optional<double> slope_ci_high;
};

// Ordinary least squares of y on x. Needs at least two distinct x values.
LinearFit least_squares(std::span<const double> x, std::span<const double> y, double confidence = 0.95);

}  // namespace clogsim::stats
