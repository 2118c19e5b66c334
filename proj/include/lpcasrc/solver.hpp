#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lpcasrc::solver {

/// min_a 1/2 ||target - dictionary * a||^2 + lambda ||a||_1
///
/// Columns of `dictionary` are expected to have unit norm; any nonzero norm
/// is accepted by the solver itself.
struct SparseProblem
{
    const Eigen::MatrixXd& dictionary;
    const Eigen::VectorXd& target;
    double lambda = 0.0;
};

struct SolverOptions
{
    /// 0 selects the default of 4 * (number of columns).
    std::size_t max_iterations = 0;
    double kkt_tolerance = 1e-8;
    /// Two breakpoints closer than this (relative to lambda) are treated as a tie.
    double tie_tolerance = 1e-12;
    /// Terminal lambda of solve_constrained.
    double min_lambda = 1e-8;
    /// Largest acceptable residual norm in solve_constrained.
    double residual_tol = 1e-6;
};

struct SparseSolution
{
    Eigen::VectorXd coefficients;
    /// Ascending column indices of the final active set.
    std::vector<Eigen::Index> active_set;
    /// Number of active-set changes along the path (kappa).
    std::size_t iterations = 0;
    double objective = 0.0;
    double residual_norm = 0.0;
};

struct KktReport
{
    double max_active_violation = 0.0;
    double max_inactive_violation = 0.0;
    bool pass = false;
};

/// Follow the LASSO homotopy path from lambda_max = ||D^T y||_inf down to
/// problem.lambda. Throws MaxIterationsExceeded, DegenerateStep or
/// DimensionMismatch.
SparseSolution solve_lasso(const SparseProblem& problem, const SolverOptions& opts = {});

/// Equality-constrained basis pursuit realised as the terminal point of the
/// homotopy path at opts.min_lambda. Throws NotRepresentable when the
/// residual there exceeds opts.residual_tol.
SparseSolution solve_constrained(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& target,
                                 const SolverOptions& opts = {});

/// Stationarity check. Nonzero coefficients must satisfy
/// d_i^T r = lambda sign(a_i); zero coefficients |d_i^T r| <= lambda.
KktReport verify_kkt(const SparseProblem& problem, const Eigen::VectorXd& coefficients, double tol);

double lasso_objective(const SparseProblem& problem, const Eigen::VectorXd& coefficients);

} // namespace lpcasrc::solver
