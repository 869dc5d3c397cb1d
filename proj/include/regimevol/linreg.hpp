#pragma once

#include <Eigen/Dense>

namespace regimevol {

/// Ordinary least squares fit of y on the columns of X.
struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd xtx_inverse;
    double ssr = 0.0;
    double sigma2 = 0.0;      // ssr / (n - k)
    double r_squared = 0.0;   // centered
    long df_residual = 0;

    double t_stat(Eigen::Index i) const { return coef(i) / std_errors(i); }
};

/// Throws Error(SingularRegression) when X is rank deficient.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace regimevol
