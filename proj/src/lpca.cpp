#include "lpcasrc/lpca.hpp"

#include "lpcasrc/error.hpp"
#include "lpcasrc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lpcasrc::lpca {

Neighbors nearest_neighbors(const Eigen::MatrixXd& points, Eigen::Index query, std::size_t count)
{
    const Eigen::Index n_points = points.cols();
    if (query < 0 || query >= n_points)
        throw DimensionMismatch("query index " + std::to_string(query) + " out of range");
    if (count >= static_cast<std::size_t>(n_points))
        throw NotEnoughNeighbors("requested " + std::to_string(count) + " neighbours among "
                                 + std::to_string(n_points - 1) + " candidates");

    std::vector<std::pair<double, Eigen::Index>> cand;
    cand.reserve(static_cast<std::size_t>(n_points - 1));
    for (Eigen::Index j = 0; j < n_points; ++j)
        if (j != query)
            cand.emplace_back((points.col(j) - points.col(query)).squaredNorm(), j);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(count), cand.end());

    Neighbors out;
    out.indices.reserve(count);
    out.distances.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.indices.push_back(cand[k].second);
        out.distances.push_back(std::sqrt(cand[k].first));
    }
    return out;
}

double epanechnikov(double u)
{
    return (u >= 0.0 && u <= 1.0) ? 1.0 - u * u : 0.0;
}

void check_parameters(int d, int n, std::size_t smallest_class)
{
    const auto limit = static_cast<long long>(smallest_class) - 1;
    if (d < 1 || d > n || static_cast<long long>(n) >= limit)
        throw Eq7Violation("local PCA parameters d=" + std::to_string(d) + ", n=" + std::to_string(n)
                           + " violate 1 <= d <= n < " + std::to_string(limit));
}

TangentBasis tangent_basis(const Eigen::MatrixXd& class_points, Eigen::Index i, int d, int n)
{
    check_parameters(d, n, static_cast<std::size_t>(class_points.cols()));
    const auto nn = nearest_neighbors(class_points, i, static_cast<std::size_t>(n) + 1);

    TangentBasis out;
    out.center_index = i;
    out.requested_dim = d;
    out.neighborhood_radius = nn.distances.back();
    out.epsilon_pca = out.neighborhood_radius * out.neighborhood_radius;
    if (out.epsilon_pca <= kMinEpsilonPca)
        throw DegenerateNeighborhood("all " + std::to_string(n + 1) + " nearest neighbours of sample "
                                     + std::to_string(i) + " coincide with it");

    const double bandwidth = std::sqrt(out.epsilon_pca);
    out.neighbors.assign(nn.indices.begin(), nn.indices.end() - 1);
    out.weights.resize(n);
    Eigen::MatrixXd weighted(class_points.rows(), n);
    for (int j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        out.weights(j) = std::sqrt(epanechnikov(nn.distances[uj] / bandwidth));
        weighted.col(j) = (class_points.col(nn.indices[uj]) - class_points.col(i)) * out.weights(j);
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    if (sv.size() > 0 && sv(0) > 0.0)
        while (rank < sv.size() && sv(rank) > kRankTolerance * sv(0))
            ++rank;
    out.basis = svd.matrixU().leftCols(std::min<Eigen::Index>(d, rank));
    canonicalize_signs(out.basis);
    return out;
}

} // namespace lpcasrc::lpca
