#include "lpcasrc/error.hpp"
#include "lpcasrc/solver.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lpcasrc;
using solver::SparseProblem;

namespace {

// Frozen from the coordinate-descent oracle (gap <= 1e-12) on the seeded 5x8 instance below.
constexpr double kFiveByEightObjective = 0.022205631024444148;

struct Instance
{
    Eigen::MatrixXd d;
    Eigen::VectorXd y;
};

Instance random_instance(std::uint64_t seed, Eigen::Index m, Eigen::Index n)
{
    std::mt19937_64 rng(seed);
    Instance in{oracle::unit_columns(oracle::random_matrix(rng, m, n)), oracle::random_matrix(rng, m, 1).col(0)};
    return in;
}

} // namespace

TEST(Solver, OrthonormalSoftThreshold)
{
    const Eigen::MatrixXd d = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::VectorXd y = d.col(0);
    const auto sol = solver::solve_lasso({d, y, 0.1});
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
    expected(0) = 0.9;
    EXPECT_LE((sol.coefficients - expected).norm(), 1e-14);
    EXPECT_EQ(sol.iterations, 1u);
    EXPECT_EQ(sol.active_set, std::vector<Eigen::Index>{0});
}

TEST(Solver, LargeLambdaGivesZero)
{
    const auto in = random_instance(3, 6, 10);
    const double lmax = (in.d.transpose() * in.y).cwiseAbs().maxCoeff();
    for (const double scale : {1.0, 1.5, 10.0}) {
        const auto sol = solver::solve_lasso({in.d, in.y, lmax * scale});
        EXPECT_EQ(sol.coefficients.norm(), 0.0);
        EXPECT_EQ(sol.iterations, 0u);
        EXPECT_TRUE(sol.active_set.empty());
    }
    const auto below = solver::solve_lasso({in.d, in.y, lmax * (1.0 - 1e-9)});
    EXPECT_GT(below.iterations, 0u);
}

TEST(Solver, FiveByEightMatchesFrozenOracle)
{
    const auto in = random_instance(20240501, 5, 8);
    const double lambda = 0.01;
    const Eigen::VectorXd ref = oracle::coordinate_descent(in.d, in.y, lambda);
    ASSERT_LE(oracle::duality_gap(in.d, in.y, lambda, ref), 1e-12);
    EXPECT_NEAR(oracle::lasso_objective(in.d, in.y, lambda, ref), kFiveByEightObjective, 1e-12);

    const auto sol = solver::solve_lasso({in.d, in.y, lambda});
    EXPECT_NEAR(sol.objective, kFiveByEightObjective, 1e-8);
    EXPECT_EQ(sol.active_set, (std::vector<Eigen::Index>{0, 4, 5, 6, 7}));
    EXPECT_TRUE(solver::verify_kkt({in.d, in.y, lambda}, sol.coefficients, 1e-8).pass);
}

TEST(Solver, RandomInstancesMatchOracle)
{
    std::mt19937_64 shapes(99);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(shapes() % 19);
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(shapes() % 40);
        const double lambda = std::array{1e-3, 1e-2, 1e-1}[shapes() % 3];
        const auto in = random_instance(1000 + static_cast<std::uint64_t>(trial), m, n);
        const SparseProblem p{in.d, in.y, lambda};
        const auto sol = solver::solve_lasso(p);
        const Eigen::VectorXd ref = oracle::coordinate_descent(in.d, in.y, lambda);
        EXPECT_NEAR(sol.objective, oracle::lasso_objective(in.d, in.y, lambda, ref), 1e-8)
            << "trial " << trial << " m=" << m << " n=" << n;
        EXPECT_TRUE(solver::verify_kkt(p, sol.coefficients, 1e-6).pass) << "trial " << trial;
    }
}

TEST(Solver, SolutionFieldsAreConsistent)
{
    const auto in = random_instance(7, 10, 25);
    const SparseProblem p{in.d, in.y, 0.02};
    const auto sol = solver::solve_lasso(p);
    EXPECT_TRUE(sol.coefficients.allFinite());
    EXPECT_NEAR(sol.objective, solver::lasso_objective(p, sol.coefficients), 1e-10);
    EXPECT_NEAR(sol.residual_norm, (in.y - in.d * sol.coefficients).norm(), 1e-12);
    for (Eigen::Index j = 0; j < sol.coefficients.size(); ++j) {
        const bool listed = std::binary_search(sol.active_set.begin(), sol.active_set.end(), j);
        EXPECT_EQ(listed, sol.coefficients(j) != 0.0);
    }
    EXPECT_TRUE(std::is_sorted(sol.active_set.begin(), sol.active_set.end()));
    EXPECT_GE(sol.iterations, sol.active_set.size());
}

TEST(Solver, HomogeneityOfThePath)
{
    const auto in = random_instance(11, 8, 15);
    const auto base = solver::solve_lasso({in.d, in.y, 0.05});
    for (const double c : {0.5, 3.0, 17.0}) {
        const Eigen::VectorXd cy = c * in.y;
        const auto scaled = solver::solve_lasso({in.d, cy, c * 0.05});
        EXPECT_LE((scaled.coefficients - c * base.coefficients).norm(), 1e-10 * c);
    }
}

TEST(Solver, EachBreakpointIsOptimal)
{
    // Solving at a sequence of lambdas reproduces the oracle at every one of them.
    const auto in = random_instance(12, 12, 30);
    const double lmax = (in.d.transpose() * in.y).cwiseAbs().maxCoeff();
    for (const double frac : {0.9, 0.5, 0.2, 0.05, 0.01, 0.001}) {
        const double lambda = frac * lmax;
        const auto sol = solver::solve_lasso({in.d, in.y, lambda});
        const Eigen::VectorXd ref = oracle::coordinate_descent(in.d, in.y, lambda);
        EXPECT_NEAR(sol.objective, oracle::lasso_objective(in.d, in.y, lambda, ref), 1e-8) << frac;
    }
}

TEST(Solver, KappaCountsActiveSetChanges)
{
    // Orthonormal columns enter one per breakpoint and never leave.
    const Eigen::MatrixXd d = Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd y(5);
    y << 5, -4, 3, -2, 1;
    EXPECT_EQ(solver::solve_lasso({d, y, 2.5}).iterations, 3u);
    EXPECT_EQ(solver::solve_lasso({d, y, 0.5}).iterations, 5u);
}

TEST(Solver, TiesAdmitTheLowerIndexFirst)
{
    const Eigen::MatrixXd d = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::Vector3d y(1.0, 1.0, 0.2);
    const auto sol = solver::solve_lasso({d, y, 0.5});
    EXPECT_EQ(sol.active_set, (std::vector<Eigen::Index>{0, 1}));
    EXPECT_NEAR(sol.coefficients(0), 0.5, 1e-14);
    EXPECT_NEAR(sol.coefficients(1), 0.5, 1e-14);
}

TEST(Solver, DuplicateColumnsDoNotBreakThePath)
{
    std::mt19937_64 rng(5);
    Eigen::MatrixXd d = oracle::unit_columns(oracle::random_matrix(rng, 6, 6));
    d.col(4) = d.col(1);
    const Eigen::VectorXd y = oracle::random_matrix(rng, 6, 1).col(0);
    const auto sol = solver::solve_lasso({d, y, 1e-3});
    const Eigen::VectorXd ref = oracle::coordinate_descent(d, y, 1e-3);
    EXPECT_NEAR(sol.objective, oracle::lasso_objective(d, y, 1e-3, ref), 1e-8);
}

TEST(Solver, RejectsInvalidProblems)
{
    const Eigen::MatrixXd d = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd short_y = Eigen::VectorXd::Ones(2);
    EXPECT_THROW(solver::solve_lasso({d, short_y, 0.1}), DimensionMismatch);
    const Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    EXPECT_THROW(solver::solve_lasso({d, y, -1.0}), DimensionMismatch);
    Eigen::MatrixXd zero_col = d;
    zero_col.col(2).setZero();
    EXPECT_THROW(solver::solve_lasso({zero_col, y, 0.1}), DimensionMismatch);
}

TEST(Solver, IterationCapIsEnforced)
{
    const auto in = random_instance(8, 10, 20);
    solver::SolverOptions opts;
    opts.max_iterations = 1;
    EXPECT_THROW(solver::solve_lasso({in.d, in.y, 1e-4}, opts), MaxIterationsExceeded);
}

TEST(SolverConstrained, ExactColumn)
{
    const auto in = random_instance(21, 8, 12);
    const Eigen::VectorXd y = in.d.col(5);
    const auto sol = solver::solve_constrained(in.d, y);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(12);
    e(5) = 1.0;
    EXPECT_LE((sol.coefficients - e).norm(), 1e-6);
    EXPECT_LE(sol.residual_norm, 1e-6);
}

TEST(SolverConstrained, ZeroTarget)
{
    const auto in = random_instance(22, 4, 6);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
    const auto sol = solver::solve_constrained(in.d, y);
    EXPECT_EQ(sol.coefficients.norm(), 0.0);
    EXPECT_EQ(sol.iterations, 0u);
}

TEST(SolverConstrained, RecoversTwoSparse)
{
    const auto in = random_instance(31, 10, 20);
    Eigen::VectorXd a0 = Eigen::VectorXd::Zero(20);
    a0(3) = 0.8;
    a0(14) = -0.6;
    const Eigen::VectorXd y = in.d * a0;

    const auto best = oracle::best_pair(in.d, y);
    ASSERT_EQ(best.i, 3);
    ASSERT_EQ(best.j, 14);
    ASSERT_LE(best.residual, 1e-12);

    const auto sol = solver::solve_constrained(in.d, y);
    EXPECT_LE((sol.coefficients - a0).norm(), 1e-6);
    std::vector<Eigen::Index> support;
    for (const auto j : sol.active_set)
        if (std::abs(sol.coefficients(j)) > 1e-6)
            support.push_back(j);
    EXPECT_EQ(support, (std::vector<Eigen::Index>{best.i, best.j}));
}

TEST(SolverConstrained, NotRepresentable)
{
    // Two columns in R^3 cannot reach a vector off their plane.
    Eigen::MatrixXd d(3, 2);
    d << 1, 0, 0, 1, 0, 0;
    const Eigen::Vector3d y(0.2, 0.3, 1.0);
    EXPECT_THROW(solver::solve_constrained(d, y), NotRepresentable);
}

TEST(Kkt, PerturbationFails)
{
    const auto in = random_instance(41, 8, 16);
    const SparseProblem p{in.d, in.y, 0.01};
    const auto sol = solver::solve_lasso(p);
    ASSERT_TRUE(solver::verify_kkt(p, sol.coefficients, 1e-6).pass);
    ASSERT_FALSE(sol.active_set.empty());
    Eigen::VectorXd bad = sol.coefficients;
    bad(sol.active_set.front()) += 0.1;
    EXPECT_FALSE(solver::verify_kkt(p, bad, 1e-6).pass);
}

TEST(Kkt, OracleSolutionPasses)
{
    const auto in = random_instance(42, 9, 14);
    const Eigen::VectorXd ref = oracle::coordinate_descent(in.d, in.y, 0.03);
    EXPECT_TRUE(solver::verify_kkt({in.d, in.y, 0.03}, ref, 1e-6).pass);
}
