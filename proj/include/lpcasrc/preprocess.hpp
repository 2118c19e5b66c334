#pragma once

#include <Eigen/Dense>

#include <filesystem>

namespace lpcasrc::preprocess {

/// Global PCA feature extraction. By default the data is not centered.
struct PcaModel
{
    /// m x m_pca, orthonormal columns (top left singular vectors).
    Eigen::MatrixXd basis;
    /// All singular values of the (possibly centered) training matrix, descending.
    Eigen::VectorXd singular_values;
    /// Sum of the top m_pca squared singular values over the total.
    double retained_energy = 0.0;
    bool centered = false;
    /// Column mean subtracted before projection; zero unless centered.
    Eigen::VectorXd mean;
    /// sigma_{m_pca} <= 1e-12 sigma_1.
    bool rank_deficient = false;

    [[nodiscard]] Eigen::Index input_dim() const { return basis.rows(); }
    [[nodiscard]] Eigen::Index feature_dim() const { return basis.cols(); }
};

/// Throws DimensionMismatch unless 1 <= m_pca <= min(rows, cols).
PcaModel pca_fit(const Eigen::MatrixXd& train, Eigen::Index m_pca, bool centered = false);

/// V^T (X - mean), column by column.
Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& x);

/// V F + mean.
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& features);

/// basis.csv, singular_values.csv and mean.csv plus pca.json metadata.
void save(const PcaModel& model, const std::filesystem::path& dir);
PcaModel load(const std::filesystem::path& dir);

} // namespace lpcasrc::preprocess
