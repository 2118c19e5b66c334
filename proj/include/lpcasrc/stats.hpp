#pragma once

#include <span>

namespace lpcasrc::stats {

/// One-sided paired t-test of H1: mean(a - b) > 0.
struct PairedTTest
{
    double mean_difference = 0.0;
    double std_difference = 0.0;
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 0.0;
    /// One-sided (1 - alpha) lower confidence bound on the mean difference.
    double ci_lower = 0.0;
    /// mean + t_{1-alpha} * se; with ci_lower, the symmetric (1 - 2 alpha) interval.
    double ci_upper = 0.0;
    /// All differences equal. p is then 0.5, 0 or 1 by the sign of the mean
    /// and the interval collapses to the mean.
    bool zero_variance = false;
};

/// Throws DimensionMismatch on unequal lengths or fewer than two pairs.
PairedTTest paired_t_test_one_sided(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double sample_std(std::span<const double> v);

} // namespace lpcasrc::stats
