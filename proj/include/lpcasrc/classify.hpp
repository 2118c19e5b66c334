#pragma once

#include "lpcasrc/dataset.hpp"
#include "lpcasrc/dictionary.hpp"
#include "lpcasrc/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lpcasrc::classify {

enum class Method { Src, LpcaSrc, SrcPruned, Tdc1, Tdc2, Knn, KnnExt };

inline constexpr Method kAllMethods[] = {Method::Src,  Method::LpcaSrc, Method::SrcPruned, Method::Tdc1,
                                         Method::Tdc2, Method::Knn,     Method::KnnExt};

std::string_view to_string(Method m);
/// Accepts the CLI spellings: src, lpca-src, src-pruned, tdc1, tdc2, knn, knn-ext.
std::optional<Method> parse_method(std::string_view name);

/// Hyperparameters. Each method reads only the ones it uses.
struct Params
{
    int n = 1;
    int d = 1;
    double lambda = 1e-3;
    int k = 1;
};

struct ParamUsage
{
    bool n = false;
    bool lambda = false;
    bool d = false;
    bool k = false;
};
ParamUsage uses(Method m);

struct Prediction
{
    int label = 0;
    /// Class labels in ascending order; class_residuals[l] belongs to class_ids[l].
    std::vector<int> class_ids;
    std::vector<double> class_residuals;
    /// Homotopy breakpoints, for the sparse-coding methods.
    std::optional<std::size_t> kappa;
    /// Columns in the dictionary used. For TDC1/TDC2, the mean subdictionary width.
    double dictionary_size = 0.0;
    /// The pruning radius had to grow to reach the closest training sample.
    bool fallback_used = false;
};

// Direct entry points. Each normalizes y where the method calls for it.

Prediction classify_src(const Dataset& train, const Eigen::VectorXd& y, double lambda,
                        const solver::SolverOptions& opts = {});

/// `dict` must be built with normalize = true.
Prediction classify_lpca_src(const dictionary::ExtendedDictionary& dict, const Eigen::VectorXd& y, double lambda,
                             std::optional<double> radius_override = std::nullopt,
                             const solver::SolverOptions& opts = {});

/// LPCA-SRC without tangent vectors.
Prediction classify_src_pruned(const Dataset& train, const Eigen::VectorXd& y, double lambda, int n,
                               std::optional<double> radius_override = std::nullopt);

/// `dict` must be built with normalize = false.
Prediction classify_tdc1(const dictionary::ExtendedDictionary& dict, const Eigen::VectorXd& y);
Prediction classify_tdc2(const dictionary::ExtendedDictionary& dict, const Eigen::VectorXd& y);
Prediction classify_tdc1(const Dataset& train, const Eigen::VectorXd& y, int d, int n, std::uint64_t seed = 0);
Prediction classify_tdc2(const Dataset& train, const Eigen::VectorXd& y, int d, int n, std::uint64_t seed = 0);

/// Majority vote over the k nearest columns; ties go to the smallest summed
/// distance, then the lowest class. Residuals are (k - votes) plus a
/// fractional distance term, so the label is still their argmin.
Prediction classify_knn(const Dataset& train, const Eigen::VectorXd& y, int k);
/// kNN over every column of an unnormalized extended dictionary.
Prediction classify_knn_ext(const dictionary::ExtendedDictionary& dict, const Eigen::VectorXd& y, int k);

/// Distance from y to its orthogonal projection onto span(columns).
/// Rank-revealing QR with relative threshold 1e-10; empty span gives ||y||.
double projection_residual(const Eigen::MatrixXd& columns, const Eigen::VectorXd& y);

/// A trained classifier. The offline phase runs in fit(); predict() is
/// const and safe to call concurrently.
class Classifier
{
public:
    virtual ~Classifier() = default;
    [[nodiscard]] virtual Prediction predict(const Eigen::VectorXd& y) const = 0;
    /// Dictionary blocks that carry fewer than d tangent vectors.
    [[nodiscard]] virtual std::size_t rank_shortfall() const { return 0; }
};

std::unique_ptr<Classifier> fit(Method method, const Dataset& train, const Params& params, std::uint64_t seed,
                                const solver::SolverOptions& opts = {});

} // namespace lpcasrc::classify
