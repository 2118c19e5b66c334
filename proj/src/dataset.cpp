#include "lpcasrc/dataset.hpp"

#include "lpcasrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lpcasrc {

std::vector<int> Dataset::class_ids() const
{
    std::vector<int> ids(labels);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<std::vector<Eigen::Index>> Dataset::class_members() const
{
    const auto ids = class_ids();
    std::vector<std::vector<Eigen::Index>> members(ids.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto pos = std::lower_bound(ids.begin(), ids.end(), labels[j]) - ids.begin();
        members[static_cast<std::size_t>(pos)].push_back(static_cast<Eigen::Index>(j));
    }
    return members;
}

std::size_t Dataset::smallest_class_size() const
{
    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    for (const auto& m : class_members())
        smallest = std::min(smallest, m.size());
    return labels.empty() ? 0 : smallest;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& columns) const
{
    Dataset out;
    out.samples.resize(samples.rows(), static_cast<Eigen::Index>(columns.size()));
    out.labels.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.samples.col(static_cast<Eigen::Index>(j)) = samples.col(columns[j]);
        out.labels.push_back(labels[static_cast<std::size_t>(columns[j])]);
    }
    return out;
}

void Dataset::validate() const
{
    if (static_cast<std::size_t>(samples.cols()) != labels.size())
        throw DimensionMismatch("dataset has " + std::to_string(samples.cols()) + " samples but "
                                + std::to_string(labels.size()) + " labels");
    if (!samples.allFinite())
        throw DimensionMismatch("dataset contains non-finite values");
}

Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& m)
{
    Eigen::MatrixXd out(m);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (norm == 0.0)
            throw DimensionMismatch("cannot normalize zero column " + std::to_string(j));
        out.col(j) /= norm;
    }
    return out;
}

Eigen::VectorXd normalized(const Eigen::VectorXd& v)
{
    const double norm = v.norm();
    if (norm == 0.0 || !std::isfinite(norm))
        throw DimensionMismatch("cannot normalize a zero or non-finite vector");
    return v / norm;
}

std::size_t argmin_lowest(const std::vector<double>& values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best])
            best = i;
    return best;
}

} // namespace lpcasrc
