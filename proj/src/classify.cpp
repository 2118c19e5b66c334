#include "lpcasrc/classify.hpp"

#include "lpcasrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace lpcasrc::classify {

namespace {

using dictionary::ExtendedDictionary;

std::size_t class_position(const std::vector<int>& class_ids, int label)
{
    return static_cast<std::size_t>(std::lower_bound(class_ids.begin(), class_ids.end(), label) - class_ids.begin());
}

Prediction from_residuals(std::vector<int> class_ids, std::vector<double> residuals)
{
    Prediction p;
    p.label = class_ids.at(argmin_lowest(residuals));
    p.class_ids = std::move(class_ids);
    p.class_residuals = std::move(residuals);
    return p;
}

/// Sparse-code y over `columns` and score each class by the residual of its coefficients.
Prediction sparse_classify(const Eigen::MatrixXd& columns, const std::vector<int>& column_labels,
                           const std::vector<int>& class_ids, const Eigen::VectorXd& y, double lambda,
                           const solver::SolverOptions& opts)
{
    const solver::SparseProblem problem{columns, y, lambda};
    const auto sol = solver::solve_lasso(problem, opts);

    std::vector<Eigen::VectorXd> partial(class_ids.size(), Eigen::VectorXd::Zero(y.size()));
    for (const auto j : sol.active_set)
        partial[class_position(class_ids, column_labels[static_cast<std::size_t>(j)])].noalias()
            += sol.coefficients(j) * columns.col(j);

    std::vector<double> residuals(class_ids.size());
    for (std::size_t l = 0; l < class_ids.size(); ++l)
        residuals[l] = (y - partial[l]).norm();
    auto p = from_residuals(class_ids, std::move(residuals));
    p.kappa = sol.iterations;
    p.dictionary_size = static_cast<double>(columns.cols());
    return p;
}

void require_normalized(const ExtendedDictionary& dict, bool normalized, const char* who)
{
    if (dict.options.normalize != normalized)
        throw DimensionMismatch(std::string(who) + (normalized ? " needs a normalized dictionary"
                                                               : " needs an unnormalized dictionary"));
}

Prediction knn_vote(const Eigen::MatrixXd& columns, const std::vector<int>& column_labels,
                    const std::vector<int>& class_ids, const Eigen::VectorXd& y, int k)
{
    if (k < 1 || k % 2 == 0)
        throw DimensionMismatch("k must be a positive odd number");
    if (y.size() != columns.rows())
        throw DimensionMismatch("test sample dimension does not match training data");
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(k), static_cast<std::size_t>(columns.cols()));

    std::vector<std::pair<double, Eigen::Index>> cand(static_cast<std::size_t>(columns.cols()));
    for (Eigen::Index j = 0; j < columns.cols(); ++j)
        cand[static_cast<std::size_t>(j)] = {(columns.col(j) - y).squaredNorm(), j};
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(count), cand.end());

    std::vector<double> votes(class_ids.size(), 0.0);
    std::vector<double> summed(class_ids.size(), 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
        const auto l = class_position(class_ids, column_labels[static_cast<std::size_t>(cand[r].second)]);
        const double dist = std::sqrt(cand[r].first);
        votes[l] += 1.0;
        summed[l] += dist;
        total += dist;
    }
    std::vector<double> residuals(class_ids.size());
    for (std::size_t l = 0; l < class_ids.size(); ++l)
        residuals[l] = (static_cast<double>(count) - votes[l]) + summed[l] / (total + 1.0);
    auto p = from_residuals(class_ids, std::move(residuals));
    p.dictionary_size = static_cast<double>(columns.cols());
    return p;
}

Prediction tdc(const ExtendedDictionary& dict, const Eigen::VectorXd& y, bool per_sample)
{
    require_normalized(dict, false, "tangent distance classification");
    const auto pruned = dictionary::prune(dict, y);
    const std::size_t n_classes = dict.class_ids.size();
    const double y_norm = y.norm();
    std::vector<double> residuals(n_classes, y_norm);
    double width_sum = 0.0;
    std::size_t portions = 0;

    if (per_sample) {
        Eigen::Index offset = 0;
        for (const auto b : pruned.retained_blocks) {
            const auto& block = dict.blocks[b];
            const double res = projection_residual(pruned.columns.middleCols(offset, block.width), y);
            residuals[block.class_index] = std::min(residuals[block.class_index], res);
            offset += block.width;
            width_sum += static_cast<double>(block.width);
            ++portions;
        }
    } else {
        std::vector<std::vector<Eigen::Index>> by_class(n_classes);
        for (std::size_t j = 0; j < pruned.labels.size(); ++j)
            by_class[class_position(dict.class_ids, pruned.labels[j])].push_back(static_cast<Eigen::Index>(j));
        for (std::size_t l = 0; l < n_classes; ++l) {
            if (by_class[l].empty())
                continue;
            Eigen::MatrixXd portion(y.size(), static_cast<Eigen::Index>(by_class[l].size()));
            for (std::size_t j = 0; j < by_class[l].size(); ++j)
                portion.col(static_cast<Eigen::Index>(j)) = pruned.columns.col(by_class[l][j]);
            residuals[l] = projection_residual(portion, y);
            width_sum += static_cast<double>(portion.cols());
            ++portions;
        }
    }
    auto p = from_residuals(dict.class_ids, std::move(residuals));
    p.dictionary_size = portions > 0 ? width_sum / static_cast<double>(portions) : 0.0;
    p.fallback_used = pruned.fallback_used;
    return p;
}

dictionary::BuildOptions build_options(Method m, const Params& params, std::uint64_t seed)
{
    dictionary::BuildOptions o;
    o.d = params.d;
    o.n = params.n;
    o.seed = seed;
    o.normalize = !(m == Method::Tdc1 || m == Method::Tdc2 || m == Method::KnnExt);
    o.include_tangents = m != Method::SrcPruned;
    return o;
}

class SrcClassifier final : public Classifier
{
public:
    SrcClassifier(const Dataset& train, double lambda, solver::SolverOptions opts)
        : columns_(normalize_columns(train.samples)), labels_(train.labels), class_ids_(train.class_ids()),
          lambda_(lambda), opts_(opts)
    {}

    Prediction predict(const Eigen::VectorXd& y) const override
    {
        if (y.size() != columns_.rows())
            throw DimensionMismatch("test sample dimension does not match training data");
        return sparse_classify(columns_, labels_, class_ids_, normalized(y), lambda_, opts_);
    }

private:
    Eigen::MatrixXd columns_;
    std::vector<int> labels_;
    std::vector<int> class_ids_;
    double lambda_;
    solver::SolverOptions opts_;
};

class DictionaryClassifier final : public Classifier
{
public:
    DictionaryClassifier(Method m, ExtendedDictionary dict, const Params& params, solver::SolverOptions opts)
        : method_(m), dict_(std::move(dict)), params_(params), opts_(opts)
    {}

    Prediction predict(const Eigen::VectorXd& y) const override
    {
        switch (method_) {
        case Method::LpcaSrc:
        case Method::SrcPruned:
            return classify_lpca_src(dict_, y, params_.lambda, std::nullopt, opts_);
        case Method::Tdc1:
            return classify_tdc1(dict_, y);
        case Method::Tdc2:
            return classify_tdc2(dict_, y);
        case Method::KnnExt:
            return classify_knn_ext(dict_, y, params_.k);
        default:
            throw DimensionMismatch("method does not use an extended dictionary");
        }
    }

    std::size_t rank_shortfall() const override { return dict_.rank_shortfall(); }

private:
    Method method_;
    ExtendedDictionary dict_;
    Params params_;
    solver::SolverOptions opts_;
};

class KnnClassifier final : public Classifier
{
public:
    KnnClassifier(const Dataset& train, int k) : train_(train), class_ids_(train.class_ids()), k_(k) {}

    Prediction predict(const Eigen::VectorXd& y) const override
    {
        return knn_vote(train_.samples, train_.labels, class_ids_, y, k_);
    }

private:
    Dataset train_;
    std::vector<int> class_ids_;
    int k_;
};

} // namespace

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Src: return "src";
    case Method::LpcaSrc: return "lpca-src";
    case Method::SrcPruned: return "src-pruned";
    case Method::Tdc1: return "tdc1";
    case Method::Tdc2: return "tdc2";
    case Method::Knn: return "knn";
    case Method::KnnExt: return "knn-ext";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    for (const auto m : kAllMethods)
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

ParamUsage uses(Method m)
{
    switch (m) {
    case Method::Src: return {false, true, false, false};
    case Method::LpcaSrc: return {true, true, true, false};
    case Method::SrcPruned: return {true, true, false, false};
    case Method::Tdc1:
    case Method::Tdc2: return {true, false, true, false};
    case Method::Knn: return {false, false, false, true};
    case Method::KnnExt: return {true, false, true, true};
    }
    return {};
}

Prediction classify_src(const Dataset& train, const Eigen::VectorXd& y, double lambda, const solver::SolverOptions& opts)
{
    train.validate();
    return SrcClassifier(train, lambda, opts).predict(y);
}

Prediction classify_lpca_src(const ExtendedDictionary& dict, const Eigen::VectorXd& y, double lambda,
                             std::optional<double> radius_override, const solver::SolverOptions& opts)
{
    require_normalized(dict, true, "LPCA-SRC");
    const Eigen::VectorXd unit = normalized(y);
    const auto pruned = dictionary::prune(dict, unit, radius_override);
    auto p = sparse_classify(pruned.columns, pruned.labels, dict.class_ids, unit, lambda, opts);
    p.fallback_used = pruned.fallback_used;
    return p;
}

Prediction classify_src_pruned(const Dataset& train, const Eigen::VectorXd& y, double lambda, int n,
                               std::optional<double> radius_override)
{
    dictionary::BuildOptions o;
    o.n = n;
    o.include_tangents = false;
    const auto dict = dictionary::build_extended(train, o);
    return classify_lpca_src(dict, y, lambda, radius_override);
}

Prediction classify_tdc1(const ExtendedDictionary& dict, const Eigen::VectorXd& y)
{
    return tdc(dict, y, false);
}

Prediction classify_tdc2(const ExtendedDictionary& dict, const Eigen::VectorXd& y)
{
    return tdc(dict, y, true);
}

Prediction classify_tdc1(const Dataset& train, const Eigen::VectorXd& y, int d, int n, std::uint64_t seed)
{
    return classify_tdc1(dictionary::build_extended(train, build_options(Method::Tdc1, {n, d, 0.0, 1}, seed)), y);
}

Prediction classify_tdc2(const Dataset& train, const Eigen::VectorXd& y, int d, int n, std::uint64_t seed)
{
    return classify_tdc2(dictionary::build_extended(train, build_options(Method::Tdc2, {n, d, 0.0, 1}, seed)), y);
}

Prediction classify_knn(const Dataset& train, const Eigen::VectorXd& y, int k)
{
    train.validate();
    return knn_vote(train.samples, train.labels, train.class_ids(), y, k);
}

Prediction classify_knn_ext(const ExtendedDictionary& dict, const Eigen::VectorXd& y, int k)
{
    require_normalized(dict, false, "kNN-Ext");
    return knn_vote(dict.columns, dict.labels, dict.class_ids, y, k);
}

double projection_residual(const Eigen::MatrixXd& columns, const Eigen::VectorXd& y)
{
    if (columns.cols() == 0)
        return y.norm();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(columns.rows(), columns.cols());
    qr.setThreshold(1e-10);
    qr.compute(columns);
    if (qr.rank() == 0)
        return y.norm();
    // Apply Q^T and drop the first rank components.
    Eigen::VectorXd qty = qr.householderQ().transpose() * y;
    return qty.tail(qty.size() - qr.rank()).norm();
}

std::unique_ptr<Classifier> fit(Method method, const Dataset& train, const Params& params, std::uint64_t seed,
                                const solver::SolverOptions& opts)
{
    train.validate();
    switch (method) {
    case Method::Src:
        return std::make_unique<SrcClassifier>(train, params.lambda, opts);
    case Method::Knn:
        return std::make_unique<KnnClassifier>(train, params.k);
    default:
        return std::make_unique<DictionaryClassifier>(
            method, dictionary::build_extended(train, build_options(method, params, seed)), params, opts);
    }
}

} // namespace lpcasrc::classify
