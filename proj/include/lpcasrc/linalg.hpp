#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace lpcasrc {

/// Flip each column so that its largest-magnitude entry is positive.
/// The first such entry wins when magnitudes tie.
inline void canonicalize_signs(Eigen::MatrixXd& basis)
{
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index arg = 0;
        basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, j) < 0.0)
            basis.col(j) *= -1.0;
    }
}

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns and equal column counts.
inline double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.cols() == 0 && b.cols() == 0)
        return 0.0;
    // sin of the largest angle is the norm of the part of b outside span(a).
    const Eigen::MatrixXd outside = b - a * (a.transpose() * b);
    const double sine = Eigen::JacobiSVD<Eigen::MatrixXd>(outside).singularValues().maxCoeff();
    return std::asin(std::min(sine, 1.0));
}

} // namespace lpcasrc
