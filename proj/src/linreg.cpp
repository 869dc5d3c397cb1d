#include "regimevol/linreg.hpp"

#include <cmath>

#include "regimevol/error.hpp"

namespace regimevol {

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (n <= k) fail(ErrorCode::TooShort, "OLS needs more observations than regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) fail(ErrorCode::SingularRegression, "design matrix is rank deficient");

    OlsFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    fit.ssr = fit.residuals.squaredNorm();
    fit.df_residual = n - k;
    fit.sigma2 = fit.ssr / static_cast<double>(fit.df_residual);

    Eigen::MatrixXd xtx = X.transpose() * X;
    fit.xtx_inverse = xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.std_errors.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.std_errors(j) = std::sqrt(fit.sigma2 * fit.xtx_inverse(j, j));
    }

    double tss = (y.array() - y.mean()).matrix().squaredNorm();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.ssr / tss : 0.0;
    return fit;
}

}  // namespace regimevol
