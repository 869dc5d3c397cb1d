#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace regimevol {

/// Asymmetric absolute loss rho_tau(w) = w * (tau - 1[w < 0]).
double check_loss(double w, double tau);

enum class QrKernel { Gaussian, Epanechnikov };

/**
 * @brief Fitted conditional quantile model for one tau.
 *
 * beta solves min sum_i rho_tau(y_i - x_i' beta) exactly at a vertex of
 * the associated linear program: at least p residuals are exactly zero
 * (the basic observations).
 */
struct QrFit {
    double tau = 0.5;
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd covariance;           // Powell kernel sandwich
    double pseudo_r2 = 0.0;               // Koenker-Machado R1(tau); NaN without intercept
    double objective = 0.0;               // minimized check loss
    std::vector<std::size_t> basis;       // interpolated observations
    bool degenerate = false;              // iteration cap hit, best vertex returned
};

/**
 * @brief Exact quantile regression through the exterior-point simplex.
 *
 * Pivots through bases of p interpolated observations, taking the
 * steepest-descent basis exchange and passing through multiple residual
 * crossings per step via a weighted-median line search; ties break on the
 * lowest observation index. Throws RankDeficient when X lacks full column
 * rank and InvalidTau outside (0,1).
 */
QrFit fit_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau);

/**
 * @brief Hall-Sheather plug-in bandwidth in quantile space,
 * n^(-1/3) z^(2/3) [1.5 phi^2(Phi^-1(tau)) / (2 Phi^-1(tau)^2 + 1)]^(1/3),
 * clamped so tau +/- h stays inside (0,1). Throws TooSmallSample for
 * n < 10.
 */
double hall_sheather_bandwidth(std::size_t n, double tau, double alpha = 0.05);

/// Alternative plug-in rule of order n^(-1/5) (Bofinger), selectable in
/// place of Hall-Sheather.
double bofinger_bandwidth(std::size_t n, double tau);

/// Bofinger-style conversion of the quantile-space bandwidth to residual
/// units through the normal quantile spread and a robust scale estimate.
double residual_bandwidth(const Eigen::VectorXd& residuals, double tau, double quantile_bandwidth);

/**
 * @brief Powell kernel sandwich covariance,
 * H = (1/n) sum b^-1 K(u_i / b) x_i x_i',
 * cov = tau (1 - tau) H^-1 (X'X / n) H^-1 / n, symmetrized after
 * inversion. Throws SingularH when the kernel mass collapses.
 */
Eigen::MatrixXd powell_covariance(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                                  double tau, double bandwidth,
                                  QrKernel kernel = QrKernel::Gaussian);

/// Koenker-Machado pseudo R^2: 1 - V(full) / V(intercept only). The model
/// must contain an intercept column (NoIntercept otherwise).
double pseudo_r_squared(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau,
                        double full_objective);

struct QuantileProcess {
    std::vector<double> taus;
    std::vector<QrFit> fits;
    std::vector<bool> ok;                  // failed quantiles flagged, not fatal
    double band_z = 1.959963984540054;     // pointwise band half-width multiplier
};

/// One fit per tau with pointwise confidence bands from the Powell
/// covariance; individual failures are recorded and skipped.
QuantileProcess quantile_process(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                 const std::vector<double>& taus);

}  // namespace regimevol
