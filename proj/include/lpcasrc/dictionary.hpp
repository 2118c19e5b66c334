#pragma once

#include "lpcasrc/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace lpcasrc::dictionary {

struct BuildOptions
{
    int d = 1;
    int n = 1;
    std::uint64_t seed = 0;
    /// Unit-normalize training samples and dictionary columns. Off for the
    /// tangent-distance and kNN-Ext baselines.
    bool normalize = true;
    /// When false, every block holds only its training sample (SRC_pruned).
    bool include_tangents = true;
};

/// One training sample together with its shifted, scaled tangent vectors.
/// Its columns occupy [first_column, first_column + width) of the parent
/// dictionary; the last of them is the training sample itself.
struct TangentBlock
{
    int label = 0;
    /// Position of the class in ascending label order.
    std::size_t class_index = 0;
    /// Position of the sample within its class.
    std::size_t class_position = 0;
    /// Column of the sample in the training dataset.
    Eigen::Index sample_index = 0;
    /// c = r * gamma, gamma ~ unif(0, 1). Zero when the block has no tangents.
    double scale = 0.0;
    /// Distance to the (n+1)st nearest same-class neighbour.
    double neighborhood_radius = 0.0;
    Eigen::Index first_column = 0;
    Eigen::Index width = 0;

    [[nodiscard]] Eigen::Index sample_column() const { return first_column + width - 1; }
    [[nodiscard]] Eigen::Index tangent_count() const { return width - 1; }
};

struct ExtendedDictionary
{
    Eigen::MatrixXd columns;
    std::vector<int> labels;
    std::vector<std::size_t> block_of_column;
    std::vector<TangentBlock> blocks;
    std::vector<int> class_ids;
    /// Median of the per-sample neighbourhood radii.
    double pruning_radius = 0.0;
    BuildOptions options;

    [[nodiscard]] Eigen::Index dim() const { return columns.rows(); }
    [[nodiscard]] auto sample(std::size_t block) const { return columns.col(blocks[block].sample_column()); }
    /// Number of blocks that came back with fewer than d tangent vectors.
    [[nodiscard]] std::size_t rank_shortfall() const;
};

/// Offline phase: local PCA at every training sample, pruning radius as the
/// median neighbourhood radius, one random scale per block.
/// Throws Eq7Violation or DegenerateNeighborhood (with class/sample context).
ExtendedDictionary build_extended(const Dataset& train, const BuildOptions& options);

struct PrunedDictionary
{
    Eigen::MatrixXd columns;
    std::vector<int> labels;
    std::vector<std::size_t> retained_blocks;
    /// Column index in the parent dictionary for each retained column.
    std::vector<Eigen::Index> source_columns;
    bool fallback_used = false;
    /// Radius actually applied: max(stored or overridden radius, distance to the closest sample).
    double radius = 0.0;

    [[nodiscard]] Eigen::Index size() const { return columns.cols(); }
};

/// Distance from y to sample x up to sign: min(||y - x||, ||y + x||).
double signed_distance(const Eigen::VectorXd& y, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Online pruning. Keeps every block whose sample (or its negative) lies
/// within the radius of y. The radius is raised to the distance of the
/// closest sample when no sample would otherwise survive. `radius_override`
/// replaces the stored median radius (use +infinity to disable pruning).
/// For normalized dictionaries y must have unit norm.
PrunedDictionary prune(const ExtendedDictionary& dict, const Eigen::VectorXd& y,
                       std::optional<double> radius_override = std::nullopt);

/// CSV matrix (one dictionary column per row) plus a JSON sidecar holding
/// labels, radius, block map and build options.
void save(const ExtendedDictionary& dict, const std::filesystem::path& dir);
ExtendedDictionary load(const std::filesystem::path& dir);

} // namespace lpcasrc::dictionary
