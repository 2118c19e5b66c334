#include "lpcasrc/stats.hpp"

#include "lpcasrc/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>
#include <vector>

namespace lpcasrc::stats {

double mean(std::span<const double> v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v)
{
    if (v.size() < 2)
        return 0.0;
    const double mu = mean(v);
    double ss = 0.0;
    for (const double x : v)
        ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PairedTTest paired_t_test_one_sided(std::span<const double> a, std::span<const double> b, double alpha)
{
    if (a.size() != b.size())
        throw DimensionMismatch("paired t-test needs samples of equal length");
    if (a.size() < 2)
        throw DimensionMismatch("paired t-test needs at least two pairs");
    if (!(alpha > 0.0 && alpha < 0.5))
        throw DimensionMismatch("alpha must lie in (0, 0.5)");

    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diff[i] = a[i] - b[i];

    PairedTTest out;
    const auto n = static_cast<double>(diff.size());
    out.mean_difference = mean(diff);
    out.std_difference = sample_std(diff);
    out.degrees_of_freedom = n - 1.0;

    bool constant = true;
    for (const double d : diff)
        constant = constant && d == diff.front();
    if (constant || out.std_difference == 0.0) {
        out.zero_variance = true;
        out.std_difference = 0.0;
        out.p_value = out.mean_difference > 0.0 ? 0.0 : (out.mean_difference < 0.0 ? 1.0 : 0.5);
        out.t_statistic = out.mean_difference > 0.0 ? INFINITY : (out.mean_difference < 0.0 ? -INFINITY : 0.0);
        out.ci_lower = out.ci_upper = out.mean_difference;
        return out;
    }

    const double se = out.std_difference / std::sqrt(n);
    const boost::math::students_t dist(out.degrees_of_freedom);
    out.t_statistic = out.mean_difference / se;
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.t_statistic));
    const double crit = boost::math::quantile(boost::math::complement(dist, alpha));
    out.ci_lower = out.mean_difference - crit * se;
    out.ci_upper = out.mean_difference + crit * se;
    return out;
}

} // namespace lpcasrc::stats
