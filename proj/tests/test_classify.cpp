#include "lpcasrc/classify.hpp"
#include "lpcasrc/error.hpp"
#include "lpcasrc/synth.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>
#include <numeric>

using namespace lpcasrc;
using namespace lpcasrc::classify;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Dataset random_dataset(std::uint64_t seed, Eigen::Index dim, int classes, int per_class)
{
    std::mt19937_64 rng(seed);
    Dataset ds;
    ds.samples = oracle::random_matrix(rng, dim, classes * per_class);
    for (int l = 0; l < classes; ++l)
        for (int i = 0; i < per_class; ++i)
            ds.labels.push_back(l + 1);
    return ds;
}

Dataset small_synthetic(std::uint64_t seed, double eta = 0.01)
{
    synth::SynthConfig cfg;
    cfg.per_class = 12;
    cfg.noise_dims = 7;
    cfg.eta = eta;
    cfg.seed = seed;
    return synth::generate(cfg).train;
}

/// Exhaustive-sort vote: most votes, then smallest summed distance, then lowest label.
int knn_oracle(const Eigen::MatrixXd& cols, const std::vector<int>& labels, const Eigen::VectorXd& y, int k)
{
    std::vector<std::pair<double, std::size_t>> all;
    for (Eigen::Index j = 0; j < cols.cols(); ++j)
        all.emplace_back((cols.col(j) - y).norm(), static_cast<std::size_t>(j));
    std::sort(all.begin(), all.end());
    std::map<int, std::pair<int, double>> tally;
    for (int r = 0; r < k; ++r) {
        auto& t = tally[labels[all[static_cast<std::size_t>(r)].second]];
        t.first += 1;
        t.second += all[static_cast<std::size_t>(r)].first;
    }
    int best = 0;
    std::pair<int, double> best_t{-1, 0.0};
    for (const auto& [label, t] : tally) {
        if (t.first > best_t.first || (t.first == best_t.first && t.second < best_t.second)) {
            best = label;
            best_t = t;
        }
    }
    return best;
}

} // namespace

TEST(Src, TrainingSampleClassifiesAsItself)
{
    const auto train = random_dataset(1, 10, 3, 4);
    for (std::size_t j = 0; j < train.size(); ++j) {
        const Eigen::VectorXd y = train.samples.col(static_cast<Eigen::Index>(j));
        const auto p = classify_src(train, y, 1e-8);
        EXPECT_EQ(p.label, train.labels[j]);
        const auto own = std::find(p.class_ids.begin(), p.class_ids.end(), p.label) - p.class_ids.begin();
        EXPECT_LE(p.class_residuals[static_cast<std::size_t>(own)], 1e-6);
    }
}

TEST(Src, OrthogonalSingleSampleClasses)
{
    Dataset train;
    train.samples = Eigen::MatrixXd::Identity(3, 2);
    train.labels = {1, 2};
    const auto p = classify_src(train, Eigen::Vector3d(2.0, 0.1, 0.3), 1e-3);
    EXPECT_EQ(p.label, 1);
    EXPECT_EQ(p.class_ids, (std::vector<int>{1, 2}));
}

TEST(Src, ResidualsMatchRecomputationFromCoefficients)
{
    const auto train = small_synthetic(3);
    const Eigen::MatrixXd x = normalize_columns(train.samples);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd raw = oracle::random_matrix(rng, train.dim(), 1).col(0);
        const Eigen::VectorXd y = raw / raw.norm();
        const double lambda = 1e-3;
        const auto sol = solver::solve_lasso({x, y, lambda});
        const auto p = classify_src(train, raw, lambda);
        ASSERT_EQ(p.class_residuals.size(), 4u);
        for (std::size_t l = 0; l < 4; ++l) {
            Eigen::VectorXd part = Eigen::VectorXd::Zero(y.size());
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                if (train.labels[static_cast<std::size_t>(j)] == static_cast<int>(l) + 1)
                    part += sol.coefficients(j) * x.col(j);
            EXPECT_NEAR(p.class_residuals[l], (y - part).norm(), 1e-12);
        }
        EXPECT_EQ(p.kappa, sol.iterations);
    }
}

TEST(Src, ScaleOfTestSampleDoesNotMatter)
{
    const auto train = small_synthetic(5);
    std::mt19937_64 rng(6);
    const Eigen::VectorXd y = oracle::random_matrix(rng, train.dim(), 1).col(0);
    const auto a = classify_src(train, y, 1e-3);
    const Eigen::VectorXd scaled = 37.0 * y;
    const auto b = classify_src(train, scaled, 1e-3);
    EXPECT_EQ(a.label, b.label);
    for (std::size_t l = 0; l < a.class_residuals.size(); ++l)
        EXPECT_NEAR(a.class_residuals[l], b.class_residuals[l], 1e-12);
}

TEST(Src, ZeroSampleIsRejected)
{
    const auto train = random_dataset(2, 4, 2, 3);
    EXPECT_THROW(classify_src(train, Eigen::VectorXd::Zero(4), 1e-3), DimensionMismatch);
}

TEST(LpcaSrc, TrainingSampleClassifiesAsItself)
{
    const auto train = small_synthetic(7);
    const auto dict = dictionary::build_extended(train, {2, 4, 1});
    for (std::size_t j = 0; j < train.size(); j += 5) {
        const auto p = classify_lpca_src(dict, train.samples.col(static_cast<Eigen::Index>(j)), 1e-6);
        EXPECT_EQ(p.label, train.labels[j]);
        EXPECT_GT(p.dictionary_size, 0.0);
        EXPECT_LE(p.dictionary_size, static_cast<double>(dict.columns.cols()));
    }
}

TEST(LpcaSrc, FallbackDegeneratesToNearestNeighbor)
{
    const auto train = small_synthetic(8, 0.05);
    const auto dict = dictionary::build_extended(train, {1, 3, 2});
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd raw = oracle::random_matrix(rng, train.dim(), 1).col(0);
        const Eigen::VectorXd y = raw / raw.norm();
        const auto p = classify_lpca_src(dict, raw, 1e-3, 0.0);
        EXPECT_TRUE(p.fallback_used);

        std::size_t nearest = 0;
        double best = kInf;
        for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
            const double dist = dictionary::signed_distance(y, dict.sample(b));
            if (dist < best) {
                best = dist;
                nearest = b;
            }
        }
        EXPECT_EQ(p.label, dict.blocks[nearest].label);
        EXPECT_EQ(p.dictionary_size, 2.0);
    }
}

TEST(LpcaSrc, ReductionToSrcWithoutTangentsOrPruning)
{
    // Shuffle the training order so the two dictionaries hold the same columns in different orders.
    auto train = small_synthetic(10);
    std::vector<Eigen::Index> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(11));
    train = train.subset(order);

    dictionary::BuildOptions opts;
    opts.n = 3;
    opts.include_tangents = false;
    const auto dict = dictionary::build_extended(train, opts);
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd y = oracle::random_matrix(rng, train.dim(), 1).col(0);
        const auto src = classify_src(train, y, 1e-3);
        const auto reduced = classify_lpca_src(dict, y, 1e-3, kInf);
        const auto pruned = classify_src_pruned(train, y, 1e-3, 3, kInf);
        EXPECT_EQ(reduced.label, src.label);
        EXPECT_EQ(pruned.label, src.label);
        for (std::size_t l = 0; l < src.class_residuals.size(); ++l) {
            EXPECT_NEAR(reduced.class_residuals[l], src.class_residuals[l], 1e-9);
            EXPECT_NEAR(pruned.class_residuals[l], src.class_residuals[l], 1e-9);
        }
    }
}

TEST(LpcaSrc, RequiresNormalizedDictionary)
{
    const auto train = small_synthetic(13);
    dictionary::BuildOptions opts;
    opts.normalize = false;
    const auto dict = dictionary::build_extended(train, opts);
    EXPECT_THROW(classify_lpca_src(dict, train.samples.col(0), 1e-3), DimensionMismatch);
    EXPECT_THROW(classify_knn_ext(dictionary::build_extended(train, {}), train.samples.col(0), 1),
                 DimensionMismatch);
}

TEST(SrcPruned, TrainingSampleClassifiesAsItself)
{
    const auto train = small_synthetic(14);
    for (std::size_t j = 0; j < train.size(); j += 7) {
        const auto p = classify_src_pruned(train, train.samples.col(static_cast<Eigen::Index>(j)), 1e-6, 3);
        EXPECT_EQ(p.label, train.labels[j]);
    }
}

TEST(Projection, MatchesSpanDistanceOracle)
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % 6);
        Eigen::MatrixXd a = oracle::random_matrix(rng, 8, cols);
        if (cols > 2)
            a.col(cols - 1) = a.col(0) - 2.0 * a.col(1);
        const Eigen::VectorXd y = oracle::random_matrix(rng, 8, 1).col(0);
        EXPECT_NEAR(projection_residual(a, y), oracle::span_distance(a, y), 1e-10) << trial;
        EXPECT_LE(projection_residual(a, y), y.norm() + 1e-15);
    }
    const Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    EXPECT_DOUBLE_EQ(projection_residual(Eigen::MatrixXd(3, 0), y), std::sqrt(3.0));
    EXPECT_DOUBLE_EQ(projection_residual(Eigen::MatrixXd::Zero(3, 2), y), std::sqrt(3.0));
}

TEST(Tdc, TrainingSampleHasZeroResidual)
{
    // High ambient dimension, so no class portion spans the whole space.
    synth::SynthConfig cfg;
    cfg.per_class = 12;
    cfg.noise_dims = 50;
    cfg.eta = 0.01;
    cfg.seed = 16;
    const auto train = synth::generate(cfg).train;
    for (std::size_t j = 0; j < train.size(); j += 9) {
        const Eigen::VectorXd y = train.samples.col(static_cast<Eigen::Index>(j));
        for (const auto& p : {classify_tdc1(train, y, 2, 4), classify_tdc2(train, y, 2, 4)}) {
            EXPECT_EQ(p.label, train.labels[j]);
            const auto own = std::find(p.class_ids.begin(), p.class_ids.end(), p.label) - p.class_ids.begin();
            EXPECT_LE(p.class_residuals[static_cast<std::size_t>(own)], 1e-10);
        }
    }
}

TEST(Tdc, ResidualsMatchLeastSquaresOracle)
{
    const auto train = random_dataset(17, 30, 3, 7);
    dictionary::BuildOptions opts;
    opts.d = 2;
    opts.n = 3;
    opts.normalize = false;
    const auto dict = dictionary::build_extended(train, opts);
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd y = oracle::random_matrix(rng, 30, 1).col(0);
        const auto pruned = dictionary::prune(dict, y);
        const auto p1 = classify_tdc1(dict, y);
        const auto p2 = classify_tdc2(dict, y);
        for (std::size_t l = 0; l < 3; ++l) {
            const int label = static_cast<int>(l) + 1;
            Eigen::MatrixXd portion(30, 0);
            double best_block = y.norm();
            for (const auto b : pruned.retained_blocks) {
                const auto& block = dict.blocks[b];
                if (block.label != label)
                    continue;
                const Eigen::MatrixXd cols = dict.columns.middleCols(block.first_column, block.width);
                best_block = std::min(best_block, oracle::span_distance(cols, y));
                portion.conservativeResize(Eigen::NoChange, portion.cols() + block.width);
                portion.rightCols(block.width) = cols;
            }
            const double whole = portion.cols() > 0 ? oracle::span_distance(portion, y) : y.norm();
            EXPECT_NEAR(p1.class_residuals[l], whole, 1e-10);
            EXPECT_NEAR(p2.class_residuals[l], best_block, 1e-10);
            EXPECT_LE(p1.class_residuals[l], y.norm() + 1e-12);
        }
    }
}

TEST(Knn, OneNeighborReturnsTrainingLabel)
{
    const auto train = random_dataset(19, 5, 3, 5);
    for (std::size_t j = 0; j < train.size(); ++j)
        EXPECT_EQ(classify_knn(train, train.samples.col(static_cast<Eigen::Index>(j)), 1).label, train.labels[j]);
}

TEST(Knn, MajorityOfThree)
{
    Dataset train;
    train.samples.resize(1, 5);
    train.samples << 0.1, 0.3, -0.2, 5.0, 6.0;
    train.labels = {1, 2, 2, 1, 1};
    const auto p = classify_knn(train, Eigen::VectorXd::Zero(1), 3);
    EXPECT_EQ(p.label, 2);
    // Residuals: class 1 has one vote, class 2 two; the summed-distance term stays below one.
    EXPECT_LT(p.class_residuals[1], p.class_residuals[0]);
    EXPECT_LT(p.class_residuals[1], 2.0);
    EXPECT_GE(p.class_residuals[0], 2.0);
}

TEST(Knn, TiesBetweenVotes)
{
    Dataset train;
    train.samples.resize(1, 3);
    train.samples << 2.0, -1.0, 5.0;
    train.labels = {1, 2, 3};
    // One vote each: the smallest summed distance wins.
    EXPECT_EQ(classify_knn(train, Eigen::VectorXd::Zero(1), 3).label, 2);

    train.samples << 1.0, -1.0, 5.0;
    // Equal votes and equal distances: the lower label wins.
    EXPECT_EQ(classify_knn(train, Eigen::VectorXd::Zero(1), 3).label, 1);
    // Equidistant single neighbours: the lower column index is taken.
    train.labels = {2, 1, 3};
    EXPECT_EQ(classify_knn(train, Eigen::VectorXd::Zero(1), 1).label, 2);
}

TEST(Knn, MatchesExhaustiveVoteOracle)
{
    const auto train = random_dataset(20, 4, 4, 10);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd y = oracle::random_matrix(rng, 4, 1).col(0);
        for (const int k : {1, 3, 5, 7})
            EXPECT_EQ(classify_knn(train, y, k).label, knn_oracle(train.samples, train.labels, y, k));
    }
}

TEST(Knn, ExtendedDictionaryMatchesOracle)
{
    const auto train = random_dataset(22, 4, 3, 8);
    dictionary::BuildOptions opts;
    opts.d = 2;
    opts.n = 4;
    opts.normalize = false;
    const auto dict = dictionary::build_extended(train, opts);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd y = oracle::random_matrix(rng, 4, 1).col(0);
        EXPECT_EQ(classify_knn_ext(dict, y, 3).label, knn_oracle(dict.columns, dict.labels, y, 3));
    }
}

TEST(Knn, EvenKIsRejected)
{
    const auto train = random_dataset(24, 3, 2, 4);
    EXPECT_THROW(classify_knn(train, Eigen::VectorXd::Ones(3), 2), DimensionMismatch);
    EXPECT_THROW(classify_knn(train, Eigen::VectorXd::Ones(3), 0), DimensionMismatch);
}

TEST(Classifier, FitMatchesDirectEntryPoints)
{
    const auto train = small_synthetic(25);
    const Params params{4, 2, 1e-3, 3};
    std::mt19937_64 rng(26);
    const Eigen::VectorXd y = oracle::random_matrix(rng, train.dim(), 1).col(0);
    const auto dict = dictionary::build_extended(train, {2, 4, 77});
    EXPECT_EQ(fit(Method::Src, train, params, 77)->predict(y).class_residuals,
              classify_src(train, y, 1e-3).class_residuals);
    EXPECT_EQ(fit(Method::LpcaSrc, train, params, 77)->predict(y).class_residuals,
              classify_lpca_src(dict, y, 1e-3).class_residuals);
    EXPECT_EQ(fit(Method::Tdc1, train, params, 77)->predict(y).class_residuals,
              classify_tdc1(train, y, 2, 4, 77).class_residuals);
    EXPECT_EQ(fit(Method::Tdc2, train, params, 77)->predict(y).class_residuals,
              classify_tdc2(train, y, 2, 4, 77).class_residuals);
    EXPECT_EQ(fit(Method::Knn, train, params, 77)->predict(y).label, classify_knn(train, y, 3).label);
    EXPECT_EQ(fit(Method::SrcPruned, train, params, 77)->predict(y).class_residuals,
              classify_src_pruned(train, y, 1e-3, 4).class_residuals);
}

TEST(Classifier, PredictionInvariants)
{
    const auto train = small_synthetic(27, 0.02);
    const Params params{3, 1, 1e-3, 3};
    std::mt19937_64 rng(28);
    for (const auto m : kAllMethods) {
        const auto c = fit(m, train, params, 5);
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd y = oracle::random_matrix(rng, train.dim(), 1).col(0);
            const auto p = c->predict(y);
            ASSERT_EQ(p.class_residuals.size(), p.class_ids.size());
            for (const double r : p.class_residuals)
                EXPECT_GE(r, 0.0);
            const auto arg = std::min_element(p.class_residuals.begin(), p.class_residuals.end())
                             - p.class_residuals.begin();
            EXPECT_EQ(p.label, p.class_ids[static_cast<std::size_t>(arg)]) << to_string(m);
            const bool sparse = m == Method::Src || m == Method::LpcaSrc || m == Method::SrcPruned;
            EXPECT_EQ(p.kappa.has_value(), sparse) << to_string(m);
        }
    }
}

TEST(Methods, NamesRoundTrip)
{
    for (const auto m : kAllMethods)
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_EQ(parse_method("lpca-src"), Method::LpcaSrc);
    EXPECT_FALSE(parse_method("LPCA_SRC").has_value());
    EXPECT_FALSE(parse_method("").has_value());
}

TEST(Methods, ParameterUsage)
{
    const auto lp = uses(Method::LpcaSrc);
    EXPECT_TRUE(lp.n && lp.lambda && lp.d && !lp.k);
    const auto src = uses(Method::Src);
    EXPECT_TRUE(!src.n && src.lambda && !src.d && !src.k);
    const auto knn = uses(Method::Knn);
    EXPECT_TRUE(!knn.n && !knn.lambda && !knn.d && knn.k);
}
