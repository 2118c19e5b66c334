#include "lpcasrc/solver.hpp"

#include "lpcasrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lpcasrc::solver {

namespace {

/// Upper-triangular Cholesky factor R of the active Gram matrix (G = R^T R),
/// kept in the order columns entered the active set.
class ActiveCholesky
{
public:
    explicit ActiveCholesky(Eigen::Index capacity) : r_(capacity, capacity) {}

    [[nodiscard]] Eigen::Index size() const { return k_; }

    /// R^{-T} b
    [[nodiscard]] Eigen::VectorXd solve_lower(const Eigen::VectorXd& b) const
    {
        return r_.topLeftCorner(k_, k_).transpose().triangularView<Eigen::Lower>().solve(b);
    }
    /// R^{-1} b
    [[nodiscard]] Eigen::VectorXd solve_upper(const Eigen::VectorXd& b) const
    {
        return r_.topLeftCorner(k_, k_).triangularView<Eigen::Upper>().solve(b);
    }

    /// Append a column whose inner products with the current active columns
    /// are `cross` and whose squared norm is `sq_norm`. Returns false (and
    /// leaves the factor untouched) if the column is numerically dependent.
    bool append(const Eigen::VectorXd& cross, double sq_norm, double dependence_tol)
    {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(k_);
        if (k_ > 0)
            w = solve_lower(cross);
        const double diag_sq = sq_norm - w.squaredNorm();
        if (!(diag_sq > dependence_tol * sq_norm))
            return false;
        if (k_ == r_.rows())
            r_.conservativeResize(2 * k_ + 1, 2 * k_ + 1);
        r_.col(k_).head(k_) = w;
        r_.row(k_).head(k_).setZero();
        r_(k_, k_) = std::sqrt(diag_sq);
        ++k_;
        return true;
    }

    /// Remove position p, restoring triangular form with Givens rotations.
    void remove(Eigen::Index p)
    {
        for (Eigen::Index j = p; j + 1 < k_; ++j)
            r_.col(j).head(k_) = r_.col(j + 1).head(k_);
        // Columns p..k-2 are now upper Hessenberg; rotate rows (i, i+1).
        for (Eigen::Index i = p; i + 1 < k_; ++i) {
            const double a = r_(i, i);
            const double b = r_(i + 1, i);
            const double rho = std::hypot(a, b);
            if (rho == 0.0)
                continue;
            const double c = a / rho;
            const double s = b / rho;
            for (Eigen::Index j = i; j + 1 < k_; ++j) {
                const double t1 = r_(i, j);
                const double t2 = r_(i + 1, j);
                r_(i, j) = c * t1 + s * t2;
                r_(i + 1, j) = -s * t1 + c * t2;
            }
            r_(i + 1, i) = 0.0;
        }
        --k_;
    }

    /// Solve G x = b.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const
    {
        return solve_upper(solve_lower(b));
    }

private:
    Eigen::MatrixXd r_;
    Eigen::Index k_ = 0;
};

void validate(const SparseProblem& p)
{
    if (p.target.size() != p.dictionary.rows())
        throw DimensionMismatch("target length " + std::to_string(p.target.size())
                                + " does not match dictionary rows " + std::to_string(p.dictionary.rows()));
    if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
        throw DimensionMismatch("lambda must be finite and nonnegative");
    if (!p.target.allFinite() || !p.dictionary.allFinite())
        throw DimensionMismatch("non-finite values in sparse coding problem");
    for (Eigen::Index j = 0; j < p.dictionary.cols(); ++j)
        if (p.dictionary.col(j).squaredNorm() == 0.0)
            throw DimensionMismatch("dictionary column " + std::to_string(j) + " is zero");
}

SparseSolution finish(const SparseProblem& p, Eigen::VectorXd coefficients, std::size_t iterations)
{
    SparseSolution sol;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j)
        if (coefficients(j) != 0.0)
            sol.active_set.push_back(j);
    sol.residual_norm = (p.target - p.dictionary * coefficients).norm();
    sol.objective = 0.5 * sol.residual_norm * sol.residual_norm + p.lambda * coefficients.lpNorm<1>();
    sol.coefficients = std::move(coefficients);
    sol.iterations = iterations;
    return sol;
}

enum class Event { None, Enter, Leave };

} // namespace

double lasso_objective(const SparseProblem& problem, const Eigen::VectorXd& coefficients)
{
    return 0.5 * (problem.target - problem.dictionary * coefficients).squaredNorm()
           + problem.lambda * coefficients.lpNorm<1>();
}

SparseSolution solve_lasso(const SparseProblem& problem, const SolverOptions& opts)
{
    validate(problem);
    const Eigen::MatrixXd& D = problem.dictionary;
    const Eigen::VectorXd& y = problem.target;
    const Eigen::Index n_cols = D.cols();
    const std::size_t max_iter = opts.max_iterations > 0 ? opts.max_iterations : 4 * static_cast<std::size_t>(n_cols);
    constexpr double denom_eps = 1e-12;
    constexpr double dependence_tol = 1e-11;

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n_cols);
    Eigen::VectorXd corr = D.transpose() * y;
    if (n_cols == 0)
        return finish(problem, std::move(alpha), 0);

    Eigen::Index first = 0;
    double lam = corr.cwiseAbs().maxCoeff(&first);
    if (problem.lambda >= lam)
        return finish(problem, std::move(alpha), 0);

    const double lam_scale = lam;
    const double tie = opts.tie_tolerance * lam_scale;
    const Eigen::VectorXd sq_norms = D.colwise().squaredNorm().transpose();

    std::vector<Eigen::Index> active;
    std::vector<double> signs;
    std::vector<bool> in_active(static_cast<std::size_t>(n_cols), false);
    std::vector<bool> blocked(static_cast<std::size_t>(n_cols), false);
    ActiveCholesky chol(std::min<Eigen::Index>(n_cols, D.rows()) + 1);
    Eigen::Index just_left = -1;
    std::size_t kappa = 0;
    std::size_t zero_steps = 0;

    auto enter = [&](Eigen::Index j) {
        Eigen::VectorXd cross(static_cast<Eigen::Index>(active.size()));
        for (std::size_t p = 0; p < active.size(); ++p)
            cross(static_cast<Eigen::Index>(p)) = D.col(active[p]).dot(D.col(j));
        if (!chol.append(cross, sq_norms(j), dependence_tol)) {
            blocked[static_cast<std::size_t>(j)] = true;
            return false;
        }
        active.push_back(j);
        signs.push_back(corr(j) >= 0.0 ? 1.0 : -1.0);
        in_active[static_cast<std::size_t>(j)] = true;
        return true;
    };

    // Re-derive the active coefficients and all correlations at the current lambda.
    auto refresh = [&]() {
        if (!active.empty()) {
            Eigen::VectorXd dty(static_cast<Eigen::Index>(active.size()));
            Eigen::VectorXd s(static_cast<Eigen::Index>(active.size()));
            for (std::size_t p = 0; p < active.size(); ++p) {
                dty(static_cast<Eigen::Index>(p)) = D.col(active[p]).dot(y);
                s(static_cast<Eigen::Index>(p)) = signs[p];
            }
            const Eigen::VectorXd a_act = chol.solve(dty - lam * s);
            for (std::size_t p = 0; p < active.size(); ++p)
                alpha(active[p]) = a_act(static_cast<Eigen::Index>(p));
        }
        Eigen::VectorXd residual = y;
        for (const auto j : active)
            residual.noalias() -= alpha(j) * D.col(j);
        corr.noalias() = D.transpose() * residual;
    };

    // Admit the first column; coincident maxima enter one at a time, lowest index first.
    for (Eigen::Index j = 0; j < n_cols; ++j) {
        if (std::abs(corr(j)) >= lam - tie) {
            first = j;
            break;
        }
    }
    enter(first);
    kappa = 1;

    while (true) {
        const auto k = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd s(k);
        for (Eigen::Index p = 0; p < k; ++p)
            s(p) = signs[static_cast<std::size_t>(p)];
        const Eigen::VectorXd dir = chol.solve(s);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(D.rows());
        for (Eigen::Index p = 0; p < k; ++p)
            v.noalias() += dir(p) * D.col(active[static_cast<std::size_t>(p)]);
        const Eigen::VectorXd a = D.transpose() * v;

        double step = lam - problem.lambda;
        Event event = Event::None;
        Eigen::Index who = -1;
        auto consider = [&](double g, Event e, Eigen::Index j) {
            g = std::max(g, 0.0);
            if (g < step - tie || (g <= step + tie && event != Event::None && j < who)) {
                step = std::min(step, g);
                event = e;
                who = j;
            }
        };

        for (Eigen::Index j = 0; j < n_cols; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (in_active[uj] || blocked[uj])
                continue;
            // The column that just left sits on the boundary; only a later crossing counts.
            const double floor = j == just_left ? tie : -INFINITY;
            if (1.0 - a(j) > denom_eps) {
                const double g = (lam - corr(j)) / (1.0 - a(j));
                if (g > floor)
                    consider(g, Event::Enter, j);
            }
            if (1.0 + a(j) > denom_eps) {
                const double g = (lam + corr(j)) / (1.0 + a(j));
                if (g > floor)
                    consider(g, Event::Enter, j);
            }
        }
        for (Eigen::Index p = 0; p < k; ++p) {
            const Eigen::Index j = active[static_cast<std::size_t>(p)];
            // Only coefficients shrinking towards zero can leave; one already past zero leaves now.
            if (dir(p) * signs[static_cast<std::size_t>(p)] < 0.0)
                consider(-alpha(j) / dir(p), Event::Leave, j);
        }

        lam -= step;
        for (Eigen::Index p = 0; p < k; ++p)
            alpha(active[static_cast<std::size_t>(p)]) += step * dir(p);
        corr.noalias() -= step * a;

        if (event == Event::None) {
            lam = problem.lambda;
            refresh();
            break;
        }

        zero_steps = step <= tie ? zero_steps + 1 : 0;
        if (zero_steps > static_cast<std::size_t>(n_cols) + 1)
            throw DegenerateStep("homotopy stalled at lambda " + std::to_string(lam)
                                 + ": repeated coincident breakpoints");

        if (event == Event::Enter) {
            just_left = -1;
            if (!enter(who))
                continue;
        } else {
            const auto pos = std::find(active.begin(), active.end(), who) - active.begin();
            chol.remove(pos);
            active.erase(active.begin() + pos);
            signs.erase(signs.begin() + pos);
            in_active[static_cast<std::size_t>(who)] = false;
            alpha(who) = 0.0;
            just_left = who;
            std::fill(blocked.begin(), blocked.end(), false);
        }
        ++kappa;
        if (kappa > max_iter)
            throw MaxIterationsExceeded("homotopy exceeded " + std::to_string(max_iter) + " breakpoints");
        refresh();
    }

    for (std::size_t p = 0; p < active.size(); ++p)
        if (alpha(active[p]) * signs[p] < 0.0)
            alpha(active[p]) = 0.0;
    return finish(problem, std::move(alpha), kappa);
}

SparseSolution solve_constrained(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& target,
                                 const SolverOptions& opts)
{
    const SparseProblem problem{dictionary, target, opts.min_lambda};
    SparseSolution sol = solve_lasso(problem, opts);
    if (sol.residual_norm > opts.residual_tol)
        throw NotRepresentable("residual " + std::to_string(sol.residual_norm) + " at lambda "
                               + std::to_string(opts.min_lambda) + " exceeds tolerance "
                               + std::to_string(opts.residual_tol));
    return sol;
}

KktReport verify_kkt(const SparseProblem& problem, const Eigen::VectorXd& coefficients, double tol)
{
    KktReport report;
    if (coefficients.size() != problem.dictionary.cols() || problem.target.size() != problem.dictionary.rows())
        return report;
    const Eigen::VectorXd corr = problem.dictionary.transpose() * (problem.target - problem.dictionary * coefficients);
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
        if (coefficients(j) != 0.0) {
            const double sgn = coefficients(j) > 0.0 ? 1.0 : -1.0;
            report.max_active_violation = std::max(report.max_active_violation,
                                                   std::abs(corr(j) - problem.lambda * sgn));
        } else {
            report.max_inactive_violation = std::max(report.max_inactive_violation,
                                                     std::abs(corr(j)) - problem.lambda);
        }
    }
    report.pass = report.max_active_violation <= tol && report.max_inactive_violation <= tol;
    return report;
}

} // namespace lpcasrc::solver
