#include "regimevol/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "regimevol/error.hpp"
#include "regimevol/stats.hpp"

namespace regimevol {

namespace {

void require_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) fail(ErrorCode::InvalidTau, "tau must lie in (0,1)");
}

struct LpSolution {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double objective = 0.0;
    std::vector<std::size_t> basis;
    bool degenerate = false;
};

double total_check_loss(const Eigen::VectorXd& u, double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += check_loss(u(i), tau);
    return s;
}

// Exterior-point simplex on the quantile-regression LP: the iterate is
// always the exact fit through p basic observations; each step swaps one
// of them for the observation where the directional derivative turns
// non-negative (weighted-median line search through the crossings).
LpSolution qr_simplex(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(X);
    rank_check.setThreshold(1e-10);
    if (rank_check.rank() < p) {
        fail(ErrorCode::RankDeficient, "design matrix lacks full column rank");
    }

    // starting basis: p independent rows via column pivoting on X'
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> row_pick(X.transpose());
    std::vector<std::size_t> basis(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        basis[static_cast<std::size_t>(j)] =
            static_cast<std::size_t>(row_pick.colsPermutation().indices()(j));
    }
    std::sort(basis.begin(), basis.end());

    LpSolution out;
    std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
    const long max_iterations = 50 * static_cast<long>(n) + 200;

    Eigen::MatrixXd basis_rows(p, p);
    Eigen::VectorXd basis_y(p);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd u = y;
    Eigen::MatrixXd directions;  // n x p, column j = X * (X_B^-1 e_j)

    for (long iteration = 0;; ++iteration) {
        for (Eigen::Index j = 0; j < p; ++j) {
            basis_rows.row(j) = X.row(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(j)]));
            basis_y(j) = y(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(j)]));
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_rows);
        if (!lu.isInvertible()) {
            out.degenerate = true;
            break;
        }
        beta = lu.solve(basis_y);
        u = y - X * beta;
        std::fill(in_basis.begin(), in_basis.end(), 0);
        for (std::size_t b : basis) {
            in_basis[b] = 1;
            u(static_cast<Eigen::Index>(b)) = 0.0;
        }

        directions = X * lu.inverse();

        // steepest basis-exchange direction over (position, sign)
        double best_rate = 0.0;
        Eigen::Index best_j = -1;
        double best_sign = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double rate_pos = 1.0 - tau;  // basic residual turning negative
            double rate_neg = tau;        // basic residual turning positive
            double scale = 1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (in_basis[static_cast<std::size_t>(i)]) continue;
                double w = directions(i, j);
                if (w == 0.0) continue;
                scale += std::abs(w);
                double ui = u(i);
                if (ui > 0.0) {
                    rate_pos += -tau * w;
                    rate_neg += tau * w;
                } else if (ui < 0.0) {
                    rate_pos += (1.0 - tau) * w;
                    rate_neg += -(1.0 - tau) * w;
                } else {
                    rate_pos += w > 0.0 ? (1.0 - tau) * w : -tau * w;
                    rate_neg += w < 0.0 ? -(1.0 - tau) * w : tau * w;
                }
            }
            double tol_j = 1e-11 * scale;
            if (rate_pos < best_rate - tol_j) {
                best_rate = rate_pos;
                best_j = j;
                best_sign = 1.0;
            }
            if (rate_neg < best_rate - tol_j) {
                best_rate = rate_neg;
                best_j = j;
                best_sign = -1.0;
            }
        }
        if (best_j < 0) break;  // no descent direction: vertex is optimal

        // crossings along the ray, processed in the order they occur
        struct Crossing {
            double t;
            double jump;
            Eigen::Index index;
        };
        std::vector<Crossing> crossings;
        crossings.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (in_basis[static_cast<std::size_t>(i)]) continue;
            double delta = best_sign * directions(i, best_j);
            if (delta == 0.0) continue;
            double t = u(i) / delta;
            if (t <= 0.0) continue;
            crossings.push_back({t, std::abs(delta), i});
        }
        std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
            if (a.t != b.t) return a.t < b.t;
            return a.index < b.index;  // deterministic tie rule
        });

        double gradient = best_rate;
        Eigen::Index entering = -1;
        for (const Crossing& c : crossings) {
            gradient += c.jump;
            if (gradient >= 0.0) {
                entering = c.index;
                break;
            }
        }
        if (entering < 0) {
            out.degenerate = true;  // numerically unbounded ray
            break;
        }
        basis[static_cast<std::size_t>(best_j)] = static_cast<std::size_t>(entering);
        if (iteration >= max_iterations) {
            out.degenerate = true;
            break;
        }
    }

    out.beta = beta;
    out.residuals = u;
    out.objective = total_check_loss(u, tau);
    std::sort(basis.begin(), basis.end());
    out.basis = basis;
    return out;
}

Eigen::Index intercept_column(const Eigen::MatrixXd& X) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if ((X.col(j).array() == 1.0).all()) return j;
    }
    return -1;
}

}  // namespace

double check_loss(double w, double tau) {
    require_tau(tau);
    return w * (tau - (w < 0.0 ? 1.0 : 0.0));
}

double hall_sheather_bandwidth(std::size_t n, double tau, double alpha) {
    if (n < 10) fail(ErrorCode::TooSmallSample, "bandwidth rule needs n >= 10");
    require_tau(tau);
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double q = normal_quantile(tau);
    const double density = normal_pdf(q);
    double h = std::pow(static_cast<double>(n), -1.0 / 3.0) * std::pow(z, 2.0 / 3.0) *
               std::pow(1.5 * density * density / (2.0 * q * q + 1.0), 1.0 / 3.0);
    double cap = 0.999 * std::min(tau, 1.0 - tau);
    return std::min(h, cap);
}

double bofinger_bandwidth(std::size_t n, double tau) {
    if (n < 10) fail(ErrorCode::TooSmallSample, "bandwidth rule needs n >= 10");
    require_tau(tau);
    const double q = normal_quantile(tau);
    const double density = normal_pdf(q);
    double numerator = 4.5 * std::pow(density, 4.0);
    double denominator = std::pow(2.0 * q * q + 1.0, 2.0);
    double h = std::pow(static_cast<double>(n), -0.2) * std::pow(numerator / denominator, 0.2);
    double cap = 0.999 * std::min(tau, 1.0 - tau);
    return std::min(h, cap);
}

double residual_bandwidth(const Eigen::VectorXd& residuals, double tau,
                          double quantile_bandwidth) {
    require_tau(tau);
    double h = std::min(quantile_bandwidth, 0.999 * std::min(tau, 1.0 - tau));
    std::vector<double> abs_sorted(residuals.data(), residuals.data() + residuals.size());
    double sd = std_dev(abs_sorted);
    double iqr = quantile(abs_sorted, 0.75) - quantile(abs_sorted, 0.25);
    double scale = sd;
    if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
    return (normal_quantile(tau + h) - normal_quantile(tau - h)) * scale;
}

Eigen::MatrixXd powell_covariance(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                                  double tau, double bandwidth, QrKernel kernel) {
    require_tau(tau);
    if (!(bandwidth > 0.0)) fail(ErrorCode::SingularH, "bandwidth must be positive");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        double z = residuals(i) / bandwidth;
        double k;
        if (kernel == QrKernel::Gaussian) {
            k = normal_pdf(z);
        } else {
            k = std::abs(z) <= 1.0 ? 0.75 * (1.0 - z * z) : 0.0;
        }
        if (k == 0.0) continue;
        H.noalias() += (k / bandwidth) * (X.row(i).transpose() * X.row(i));
    }
    H /= static_cast<double>(n);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        fail(ErrorCode::SingularH, "kernel density matrix is singular; bandwidth too small");
    }
    Eigen::MatrixXd h_inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    if (!h_inv.allFinite()) fail(ErrorCode::SingularH, "kernel density matrix is singular");

    Eigen::MatrixXd meat = X.transpose() * X / static_cast<double>(n);
    Eigen::MatrixXd cov = tau * (1.0 - tau) * h_inv * meat * h_inv / static_cast<double>(n);
    return 0.5 * (cov + cov.transpose());
}

double pseudo_r_squared(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau,
                        double full_objective) {
    require_tau(tau);
    if (intercept_column(X) < 0) {
        fail(ErrorCode::NoIntercept, "pseudo R^2 requires an intercept column");
    }
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(y.size(), 1);
    LpSolution restricted = qr_simplex(y, ones, tau);
    if (!(restricted.objective > 0.0)) return full_objective > 0.0 ? 0.0 : 1.0;
    return std::clamp(1.0 - full_objective / restricted.objective, 0.0, 1.0);
}

QrFit fit_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau) {
    require_tau(tau);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p) fail(ErrorCode::TooShort, "need more observations than coefficients");
    if (y.size() != n) fail(ErrorCode::InvalidParams, "y length does not match X");

    LpSolution solution = qr_simplex(y, X, tau);

    QrFit fit;
    fit.tau = tau;
    fit.beta = solution.beta;
    fit.residuals = solution.residuals;
    fit.objective = solution.objective;
    fit.basis = solution.basis;
    fit.degenerate = solution.degenerate;

    fit.covariance = Eigen::MatrixXd::Zero(p, p);
    if (n >= 10) {
        double hq = hall_sheather_bandwidth(static_cast<std::size_t>(n), tau);
        double b = residual_bandwidth(solution.residuals, tau, hq);
        if (b > 0.0) {
            try {
                fit.covariance = powell_covariance(solution.residuals, X, tau, b);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SingularH) throw;
            }
        }
    }

    fit.pseudo_r2 = std::numeric_limits<double>::quiet_NaN();
    if (intercept_column(X) >= 0) {
        fit.pseudo_r2 = pseudo_r_squared(y, X, tau, fit.objective);
    }
    return fit;
}

QuantileProcess quantile_process(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                 const std::vector<double>& taus) {
    for (double tau : taus) require_tau(tau);
    for (std::size_t i = 1; i < taus.size(); ++i) {
        if (!(taus[i] > taus[i - 1])) {
            fail(ErrorCode::InvalidTau, "quantile grid must be strictly increasing");
        }
    }
    QuantileProcess process;
    process.taus = taus;
    for (double tau : taus) {
        try {
            process.fits.push_back(fit_qr(y, X, tau));
            process.ok.push_back(true);
        } catch (const Error&) {
            process.fits.push_back(QrFit{});
            process.fits.back().tau = tau;
            process.ok.push_back(false);
        }
    }
    return process;
}

}  // namespace regimevol
