#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lpcasrc {

/// Labelled samples stored column-major: column j of `samples` has label `labels[j]`.
struct Dataset
{
    Eigen::MatrixXd samples;
    std::vector<int> labels;

    [[nodiscard]] Eigen::Index dim() const { return samples.rows(); }
    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] bool empty() const { return labels.empty(); }

    /// Distinct labels in ascending order. Class index l refers to class_ids()[l].
    [[nodiscard]] std::vector<int> class_ids() const;

    /// Column indices per class, in class_ids() order, each list ascending.
    [[nodiscard]] std::vector<std::vector<Eigen::Index>> class_members() const;

    [[nodiscard]] std::size_t smallest_class_size() const;

    /// New dataset holding the given columns, in the given order.
    [[nodiscard]] Dataset subset(const std::vector<Eigen::Index>& columns) const;

    /// Throws DimensionMismatch if labels and samples disagree.
    void validate() const;
};

/// Copy of `m` with every column scaled to unit l2-norm. Zero columns raise DimensionMismatch.
Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& m);

/// Unit-norm copy of `v`. A zero vector raises DimensionMismatch.
Eigen::VectorXd normalized(const Eigen::VectorXd& v);

/// Index of the smallest value; the lowest index wins ties.
std::size_t argmin_lowest(const std::vector<double>& values);

} // namespace lpcasrc
