#include "regimevol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regimevol/error.hpp"
#include "regimevol/linreg.hpp"
#include "regimevol/stats.hpp"

namespace regimevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Response-surface coefficients for the Dickey-Fuller tau distribution:
// cv = b0 + b1/n + b2/n^2 + b3/n^3, rows ordered 1%, 5%, 10%.
constexpr double kTauNone[3][4] = {
    {-2.56574, -2.2358, -3.627, 0.0},
    {-1.94100, -0.2686, -3.365, 31.223},
    {-1.61682, 0.2656, -2.714, 25.364},
};
constexpr double kTauConst[3][4] = {
    {-3.43035, -6.5393, -16.786, -79.433},
    {-2.86154, -2.8903, -4.234, -40.040},
    {-2.56677, -1.5384, -2.809, 0.0},
};
constexpr double kTauTrend[3][4] = {
    {-3.95877, -9.0531, -28.428, -134.155},
    {-3.41049, -4.3904, -9.036, -45.374},
    {-3.12705, -2.5856, -3.925, -22.380},
};

double surface(const double* b, double n) {
    return b[0] + b[1] / n + b[2] / (n * n) + b[3] / (n * n * n);
}

int default_max_lags(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

struct AdfRegression {
    double statistic = 0.0;
    double ssr = 0.0;
    long nobs = 0;
    long ncoef = 0;
};

// dy_t on [y_{t-1}, dy_{t-1..t-p}, break dummies, deterministic terms],
// using observations t = start .. n-1 (start >= p+1)
AdfRegression adf_regression(std::span<const double> y, int p, DeterministicTerms terms,
                             std::span<const std::size_t> breaks, std::size_t start) {
    const std::size_t n = y.size();
    const std::size_t rows = n - start;
    long cols = 1 + p + static_cast<long>(breaks.size());
    if (terms != DeterministicTerms::None) cols += 1;
    if (terms == DeterministicTerms::ConstantTrend) cols += 1;
    if (static_cast<long>(rows) <= cols) fail(ErrorCode::TooShort, "ADF regression underdetermined");

    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd dy(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t t = start + r;
        dy(static_cast<Eigen::Index>(r)) = y[t] - y[t - 1];
        long c = 0;
        X(static_cast<Eigen::Index>(r), c++) = y[t - 1];
        for (int i = 1; i <= p; ++i) {
            X(static_cast<Eigen::Index>(r), c++) = y[t - static_cast<std::size_t>(i)] -
                                                   y[t - static_cast<std::size_t>(i) - 1];
        }
        for (std::size_t b : breaks) {
            X(static_cast<Eigen::Index>(r), c++) = t > b ? 1.0 : 0.0;
        }
        if (terms != DeterministicTerms::None) X(static_cast<Eigen::Index>(r), c++) = 1.0;
        if (terms == DeterministicTerms::ConstantTrend) {
            X(static_cast<Eigen::Index>(r), c++) = static_cast<double>(t);
        }
    }

    OlsFit fit = ols(X, dy);
    if (!(fit.sigma2 > 0.0)) {
        fail(ErrorCode::SingularRegression, "zero residual variance in ADF regression");
    }
    AdfRegression out;
    out.statistic = fit.t_stat(0);
    out.ssr = fit.ssr;
    out.nobs = static_cast<long>(rows);
    out.ncoef = cols;
    return out;
}

}  // namespace

CriticalValues dickey_fuller_critical_values(DeterministicTerms terms, long nobs) {
    const double n = static_cast<double>(std::max<long>(nobs, 20));
    const auto& table = terms == DeterministicTerms::None
                            ? kTauNone
                            : (terms == DeterministicTerms::Constant ? kTauConst : kTauTrend);
    return CriticalValues{surface(table[0], n), surface(table[1], n), surface(table[2], n)};
}

UnitRootResult adf_test(std::span<const double> y, DeterministicTerms terms, int max_lags,
                        std::span<const std::size_t> break_indices) {
    const std::size_t n = y.size();
    if (max_lags < 0) max_lags = default_max_lags(n);
    if (n <= static_cast<std::size_t>(max_lags) + 10) {
        fail(ErrorCode::TooShort, "series too short for ADF with max_lags=" +
                                      std::to_string(max_lags));
    }

    // BIC over 0..max_lags on the common sample, then refit at the chosen
    // lag with all observations available for it.
    std::size_t common_start = static_cast<std::size_t>(max_lags) + 1;
    int best_p = 0;
    double best_bic = kInf;
    for (int p = 0; p <= max_lags; ++p) {
        AdfRegression reg = adf_regression(y, p, terms, break_indices, common_start);
        double nobs = static_cast<double>(reg.nobs);
        double bic = nobs * std::log(std::max(reg.ssr / nobs, 1e-300)) +
                     static_cast<double>(reg.ncoef) * std::log(nobs);
        if (bic < best_bic) {
            best_bic = bic;
            best_p = p;
        }
    }

    AdfRegression reg = adf_regression(y, best_p, terms, break_indices,
                                       static_cast<std::size_t>(best_p) + 1);
    UnitRootResult result;
    result.statistic = reg.statistic;
    result.lags_used = best_p;
    result.terms = terms;
    result.nobs = reg.nobs;
    result.critical_values = dickey_fuller_critical_values(terms, reg.nobs);
    result.reject_at_5pct = reg.statistic < result.critical_values.pct5;
    return result;
}

UnitRootResult pp_test(std::span<const double> y, DeterministicTerms terms) {
    const std::size_t n = y.size();
    if (n < 25) fail(ErrorCode::TooShort, "PP test needs at least 25 observations");

    const std::size_t rows = n - 1;
    long cols = 1 + (terms != DeterministicTerms::None ? 1 : 0) +
                (terms == DeterministicTerms::ConstantTrend ? 1 : 0);
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd dy(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t t = r + 1;
        dy(static_cast<Eigen::Index>(r)) = y[t] - y[t - 1];
        long c = 0;
        X(static_cast<Eigen::Index>(r), c++) = y[t - 1];
        if (terms != DeterministicTerms::None) X(static_cast<Eigen::Index>(r), c++) = 1.0;
        if (terms == DeterministicTerms::ConstantTrend) {
            X(static_cast<Eigen::Index>(r), c++) = static_cast<double>(t);
        }
    }
    OlsFit fit = ols(X, dy);
    if (!(fit.sigma2 > 0.0)) {
        fail(ErrorCode::SingularRegression, "zero residual variance in PP regression");
    }

    const double T = static_cast<double>(rows);
    const Eigen::VectorXd& e = fit.residuals;
    double gamma0 = e.squaredNorm() / T;
    int bandwidth = static_cast<int>(std::floor(4.0 * std::pow(T / 100.0, 2.0 / 9.0)));
    double lambda2 = gamma0;
    for (int j = 1; j <= bandwidth; ++j) {
        double gj = 0.0;
        for (std::size_t t = static_cast<std::size_t>(j); t < rows; ++t) {
            gj += e(static_cast<Eigen::Index>(t)) * e(static_cast<Eigen::Index>(t - j));
        }
        gj /= T;
        lambda2 += 2.0 * (1.0 - static_cast<double>(j) / (bandwidth + 1.0)) * gj;
    }
    lambda2 = std::max(lambda2, 1e-12 * gamma0);

    double t_stat = fit.t_stat(0);
    double se_rho = fit.std_errors(0);
    double s = std::sqrt(fit.sigma2);
    double z = std::sqrt(gamma0 / lambda2) * t_stat -
               0.5 * (lambda2 - gamma0) / std::sqrt(lambda2) * (T * se_rho / s);

    UnitRootResult result;
    result.statistic = z;
    result.lags_used = bandwidth;
    result.terms = terms;
    result.nobs = static_cast<long>(rows);
    result.critical_values = dickey_fuller_critical_values(terms, result.nobs);
    result.reject_at_5pct = z < result.critical_values.pct5;
    return result;
}

namespace {

// Running SSR of a segment that grows at the front; O(p^2) per added row.
class SegmentCost {
public:
    SegmentCost(std::span<const double> y, const Eigen::MatrixXd* X)
        : y_(y), X_(X), p_(X ? X->cols() : 1) {}

    void reset(std::size_t lo, std::size_t hi) {  // inclusive segment [lo, hi]
        lo_ = lo;
        hi_ = hi;
        xtx_.setZero(p_, p_);
        xty_.setZero(p_);
        yty_ = 0.0;
        for (std::size_t t = lo; t <= hi; ++t) add_row(t);
    }

    void extend_front() {
        --lo_;
        add_row(lo_);
    }

    double ssr() const {
        if (!X_) {
            double len = static_cast<double>(hi_ - lo_ + 1);
            return std::max(0.0, yty_ - xty_(0) * xty_(0) / len);  // intercept-only shortcut
        }
        Eigen::VectorXd b = xtx_.ldlt().solve(xty_);
        return std::max(0.0, yty_ - xty_.dot(b));
    }

private:
    void add_row(std::size_t t) {
        double yt = y_[t];
        yty_ += yt * yt;
        if (!X_) {
            xtx_(0, 0) += 1.0;
            xty_(0) += yt;
            return;
        }
        Eigen::VectorXd row = X_->row(static_cast<Eigen::Index>(t)).transpose();
        xtx_ += row * row.transpose();
        xty_ += row * yt;
    }

    std::span<const double> y_;
    const Eigen::MatrixXd* X_;
    Eigen::Index p_;
    std::size_t lo_ = 0, hi_ = 0;
    Eigen::MatrixXd xtx_;
    Eigen::VectorXd xty_;
    double yty_ = 0.0;
};

// 5% critical values of sup F(l+1 | l), 15% trimming, one regressor
constexpr double kSupFCrit5[5] = {8.58, 10.13, 11.14, 11.83, 12.25};

}  // namespace

BreakTestResult bai_perron(std::span<const double> y, const Eigen::MatrixXd* X, int max_breaks,
                           double trim, BreakSelection selection) {
    const std::size_t n = y.size();
    const long p = X ? X->cols() : 1;
    if (!(trim >= 0.05 && trim <= 0.25)) {
        fail(ErrorCode::InvalidTrim, "trim must lie in [0.05, 0.25]");
    }
    if (X && static_cast<std::size_t>(X->rows()) != n) {
        fail(ErrorCode::InvalidParams, "regressor matrix row count mismatch");
    }
    const std::size_t h = std::max<std::size_t>(
        static_cast<std::size_t>(std::ceil(trim * static_cast<double>(n))),
        static_cast<std::size_t>(p) + 1);
    if (n < static_cast<std::size_t>(max_breaks + 1) * h) {
        fail(ErrorCode::TooShort, "series too short for " + std::to_string(max_breaks) +
                                      " breaks at trim " + std::to_string(trim));
    }

    // ssr[m][j]: minimal SSR over partitions of y[0..j] into m+1 segments.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> ssr(static_cast<std::size_t>(max_breaks) + 1,
                                         std::vector<double>(n, kInf));
    std::vector<std::vector<std::size_t>> arg(static_cast<std::size_t>(max_breaks) + 1,
                                              std::vector<std::size_t>(n, 0));

    SegmentCost cost(y, X);
    for (std::size_t j = h - 1; j < n; ++j) {
        cost.reset(0, j);
        ssr[0][j] = cost.ssr();
    }
    for (int m = 1; m <= max_breaks; ++m) {
        const std::size_t mu = static_cast<std::size_t>(m);
        // last segment [i+1..j]; previous breaks partition [0..i]
        for (std::size_t j = (mu + 1) * h - 1; j < n; ++j) {
            std::size_t i_hi = j - h;            // shortest admissible last segment
            std::size_t i_lo = mu * h - 1;       // room for m segments before
            cost.reset(i_hi + 1, j);
            double best = kInf;
            std::size_t best_i = i_lo;
            for (std::size_t i = i_hi;; --i) {
                double candidate = ssr[mu - 1][i] + cost.ssr();
                if (candidate < best) {
                    best = candidate;
                    best_i = i;
                }
                if (i == i_lo) break;
                cost.extend_front();
            }
            ssr[mu][j] = best;
            arg[mu][j] = best_i;
        }
    }

    auto backtrack = [&](int m) {
        std::vector<std::size_t> breaks;
        std::size_t j = n - 1;
        for (int level = m; level >= 1; --level) {
            std::size_t i = arg[static_cast<std::size_t>(level)][j];
            breaks.push_back(i);
            j = i;
        }
        std::reverse(breaks.begin(), breaks.end());
        return breaks;
    };

    BreakTestResult result;
    const double dn = static_cast<double>(n);

    if (selection == BreakSelection::Bic) {
        int best_m = 0;
        double best_bic = kInf;
        for (int m = 0; m <= max_breaks; ++m) {
            double s = ssr[static_cast<std::size_t>(m)][n - 1];
            double k = static_cast<double>((m + 1) * p + m);
            double bic = std::isfinite(s)
                             ? dn * std::log(std::max(s / dn, 1e-300)) + k * std::log(dn)
                             : nan;
            result.criterion_values.push_back(bic);
            if (std::isfinite(bic) && bic < best_bic) {
                best_bic = bic;
                best_m = m;
            }
        }
        result.num_breaks = best_m;
    } else {
        // sequential sup-F(l+1 | l), 5% level, tabulated for the
        // intercept-only design at 15% trimming
        int l = 0;
        while (l < max_breaks) {
            double ssr_l = ssr[static_cast<std::size_t>(l)][n - 1];
            double ssr_l1 = ssr[static_cast<std::size_t>(l) + 1][n - 1];
            if (!std::isfinite(ssr_l1)) break;
            double dof = dn - static_cast<double>((l + 2) * p + l + 1);
            double f = (ssr_l - ssr_l1) / (ssr_l1 / std::max(dof, 1.0));
            result.criterion_values.push_back(f);
            double crit = kSupFCrit5[std::min(l, 4)];
            if (f <= crit) break;
            ++l;
        }
        result.num_breaks = l;
    }

    result.break_indices = backtrack(result.num_breaks);
    result.segment_ssr = ssr[static_cast<std::size_t>(result.num_breaks)][n - 1];
    return result;
}

ArchLmResult arch_lm(std::span<const double> residuals, int lags) {
    const std::size_t n = residuals.size();
    if (lags < 1) fail(ErrorCode::InvalidParams, "lags must be >= 1");
    if (n <= static_cast<std::size_t>(lags) + 10) {
        fail(ErrorCode::TooShort, "series too short for ARCH-LM with lags=" +
                                      std::to_string(lags));
    }

    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = residuals[i] * residuals[i];

    const std::size_t rows = n - static_cast<std::size_t>(lags);
    Eigen::MatrixXd X(rows, lags + 1);
    Eigen::VectorXd yv(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t t = r + static_cast<std::size_t>(lags);
        yv(static_cast<Eigen::Index>(r)) = sq[t];
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (int j = 1; j <= lags; ++j) {
            X(static_cast<Eigen::Index>(r), j) = sq[t - static_cast<std::size_t>(j)];
        }
    }

    ArchLmResult result;
    result.lags = lags;
    double tss = (yv.array() - yv.mean()).matrix().squaredNorm();
    if (!(tss > 0.0)) {  // constant squared residuals carry no ARCH signal
        result.lm_statistic = 0.0;
        result.p_value = 1.0;
        return result;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    Eigen::VectorXd b = qr.solve(yv);
    double ssr_reg = (yv - X * b).squaredNorm();
    double r2 = std::clamp(1.0 - ssr_reg / tss, 0.0, 1.0);
    result.lm_statistic = static_cast<double>(rows) * r2;
    result.p_value = chi_squared_sf(result.lm_statistic, lags);
    return result;
}

std::vector<std::pair<std::string, double>> vif(const Eigen::MatrixXd& X,
                                                std::span<const std::string> names) {
    const Eigen::Index k = X.cols();
    const Eigen::Index n = X.rows();
    if (k < 2) fail(ErrorCode::InvalidParams, "VIF needs at least two columns");
    if (names.size() != static_cast<std::size_t>(k)) {
        fail(ErrorCode::InvalidParams, "name count does not match column count");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        double v = (X.col(j).array() - X.col(j).mean()).matrix().squaredNorm();
        if (!(v > 0.0)) {
            fail(ErrorCode::ConstantColumn, "column '" + names[static_cast<std::size_t>(j)] +
                                                "' is constant");
        }
    }

    std::vector<std::pair<std::string, double>> out;
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::MatrixXd others(n, k);  // intercept + remaining columns
        others.col(0).setOnes();
        Eigen::Index c = 1;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (i == j) continue;
            others.col(c++) = X.col(i);
        }
        others.conservativeResize(n, c);
        Eigen::VectorXd target = X.col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
        Eigen::VectorXd b = qr.solve(target);
        double ssr_j = (target - others * b).squaredNorm();
        double tss_j = (target.array() - target.mean()).matrix().squaredNorm();
        double r2 = 1.0 - ssr_j / tss_j;
        double value = r2 >= 1.0 - 1e-12 ? kInf : 1.0 / (1.0 - r2);
        out.emplace_back(names[static_cast<std::size_t>(j)], value);
    }
    return out;
}

}  // namespace regimevol
