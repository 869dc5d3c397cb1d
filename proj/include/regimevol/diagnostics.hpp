#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regimevol {

/// Deterministic components included in a unit-root test regression.
enum class DeterministicTerms {
    None,           ///< no constant, no trend
    Constant,       ///< constant only
    ConstantTrend,  ///< constant and linear trend
};

struct CriticalValues {
    double pct1 = 0.0;
    double pct5 = 0.0;
    double pct10 = 0.0;
};

/**
 * @brief Result of an ADF or PP unit-root test.
 *
 * The null hypothesis is a unit root; the statistic is compared against
 * left-tail critical values, so rejection (stationarity) corresponds to a
 * statistic below the critical value.
 */
struct UnitRootResult {
    double statistic = 0.0;
    int lags_used = 0;
    CriticalValues critical_values;
    bool reject_at_5pct = false;
    DeterministicTerms terms = DeterministicTerms::Constant;
    long nobs = 0;  // effective observations in the test regression
};

/// Finite-sample Dickey-Fuller critical values from the response-surface
/// approximations; validated against the Monte Carlo fallback in tests.
CriticalValues dickey_fuller_critical_values(DeterministicTerms terms, long nobs);

/**
 * @brief Augmented Dickey-Fuller test.
 *
 * Fits dy_t = deterministic + rho * y_{t-1} + sum_i gamma_i dy_{t-i} and
 * reports the t-ratio on rho. The lag order is chosen by BIC over
 * 0..max_lags; max_lags < 0 selects the default floor(12 * (n/100)^0.25).
 * Optional break_indices add post-break level-shift dummies to the
 * regression (break-augmented variant).
 */
UnitRootResult adf_test(std::span<const double> y, DeterministicTerms terms,
                        int max_lags = -1, std::span<const std::size_t> break_indices = {});

/**
 * @brief Phillips-Perron test: the lag augmentation is replaced by a
 * nonparametric long-run variance correction (Bartlett kernel, automatic
 * bandwidth floor(4 * (n/100)^(2/9))).
 */
UnitRootResult pp_test(std::span<const double> y, DeterministicTerms terms);

/// Multiple-break least-squares result; indices are the last observation
/// of each pre-break segment (0-based).
struct BreakTestResult {
    std::vector<std::size_t> break_indices;
    int num_breaks = 0;
    double segment_ssr = 0.0;
    std::vector<double> criterion_values;  // one per candidate break count m = 0..max
};

enum class BreakSelection { Bic, SequentialSupF };

/**
 * @brief Multiple structural breaks by global SSR minimization.
 *
 * Dynamic programming over all admissible partitions with minimum segment
 * length ceil(trim * n); the number of breaks is selected by BIC by
 * default, with the sequential sup-F procedure available for mean-shift
 * (intercept-only) designs. X = nullptr fits an intercept per segment.
 */
BreakTestResult bai_perron(std::span<const double> y, const Eigen::MatrixXd* X,
                           int max_breaks, double trim = 0.15,
                           BreakSelection selection = BreakSelection::Bic);

struct ArchLmResult {
    double lm_statistic = 0.0;
    int lags = 0;
    double p_value = 1.0;
};

/// Engle's LM test: squared residuals regressed on their own lags,
/// LM = n * R^2, p-value from chi-squared(lags).
ArchLmResult arch_lm(std::span<const double> residuals, int lags);

/// Variance inflation factors, one per column; +infinity flags perfect
/// collinearity. Throws ConstantColumn when a column has zero variance.
std::vector<std::pair<std::string, double>> vif(const Eigen::MatrixXd& X,
                                                std::span<const std::string> names);

}  // namespace regimevol
