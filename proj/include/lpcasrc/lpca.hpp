#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lpcasrc::lpca {

struct Neighbors
{
    std::vector<Eigen::Index> indices;
    std::vector<double> distances;
};

/// The `count` nearest columns of `points` to column `query`, excluding the
/// query itself. Sorted by ascending Euclidean distance, ties by ascending
/// index. Linear scan. Throws NotEnoughNeighbors if count >= points.cols().
Neighbors nearest_neighbors(const Eigen::MatrixXd& points, Eigen::Index query, std::size_t count);

/// Approximate tangent hyperplane at one sample of a class.
struct TangentBasis
{
    /// m x d_eff orthonormal columns, d_eff <= requested d (fewer when the
    /// weighted neighbourhood matrix is rank deficient).
    Eigen::MatrixXd basis;
    Eigen::Index center_index = 0;
    /// Distance to the (n+1)st nearest same-class neighbour.
    double neighborhood_radius = 0.0;
    /// Squared neighbourhood radius, the kernel bandwidth.
    double epsilon_pca = 0.0;
    /// The n nearest neighbours used to form the weighted matrix.
    std::vector<Eigen::Index> neighbors;
    /// sqrt(K(dist / sqrt(eps))) for each neighbour.
    Eigen::VectorXd weights;
    int requested_dim = 0;
};

/// Epanechnikov kernel (1 - u^2) on [0, 1], zero elsewhere.
double epanechnikov(double u);

/// Throws Eq7Violation unless 1 <= d <= n < smallest_class - 1.
void check_parameters(int d, int n, std::size_t smallest_class);

/// Weighted local PCA at column i of `class_points` using its n nearest
/// neighbours and the (n+1)st as bandwidth. Throws Eq7Violation or
/// DegenerateNeighborhood (all n+1 neighbours coincide with the centre).
TangentBasis tangent_basis(const Eigen::MatrixXd& class_points, Eigen::Index i, int d, int n);

/// Relative singular-value cut-off for the effective rank of the weighted matrix.
inline constexpr double kRankTolerance = 1e-10;

/// Smallest admissible eps_pca.
inline constexpr double kMinEpsilonPca = 1e-24;

} // namespace lpcasrc::lpca
