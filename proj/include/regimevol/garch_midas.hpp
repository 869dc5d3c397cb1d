#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regimevol/time_series.hpp"

namespace regimevol {

/// Functional form of the low-frequency component: Log guarantees
/// positivity, Level is the literal linear form with runtime checks.
enum class LongRunForm { Log, Level };

/// Normalized beta lag weights phi_k, k = 1..K, evaluated on the interior
/// grid k/(K+1) so neither endpoint degenerates.
struct BetaWeights {
    int K = 0;
    double w1 = 1.0;
    double w2 = 1.0;
    std::vector<double> weights;  // sum to 1
};

/// phi_k proportional to (k/(K+1))^(w1-1) * (1 - k/(K+1))^(w2-1).
/// Throws InvalidShape when a shape parameter is below 1.
BetaWeights beta_weights(int K, double w1, double w2);

struct GarchMidasSpec {
    int K = 12;                     // monthly lags per covariate
    bool estimate_w1 = false;       // w1 pinned at 1 unless enabled
    LongRunForm form = LongRunForm::Log;
    std::string covariate1_name = "x1";
    std::string covariate2_name = "x2";
};

/**
 * @brief Parameters of the two-covariate model.
 *
 * Daily variance factors as h * tau: the daily component follows
 *   h_i = (1 - alpha - gamma/2 - beta)
 *         + (alpha + gamma * 1[eps_{i-1} < 0]) * eps_{i-1}^2 / tau
 *         + beta * h_{i-1}
 * and the monthly component is
 *   tau_t = m + theta1 * sum_k phi_k(w2_1) x1_{t-k}
 *             + theta2 * sum_k phi_k(w2_2) x2_{t-k}
 * (exponentiated under the Log form).
 */
struct GarchMidasParams {
    double mu = 0.0;
    double alpha = 0.05;
    double gamma = 0.05;
    double beta = 0.88;
    double m = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double w2_1 = 3.0;
    double w2_2 = 3.0;
    double w1_1 = 1.0;
    double w1_2 = 1.0;

    double persistence() const { return alpha + 0.5 * gamma + beta; }

    /// Constraints required for a positive, mean-reverting daily component.
    bool admissible() const {
        return alpha >= 0.0 && beta >= 0.0 && alpha + gamma >= 0.0 && persistence() < 1.0 &&
               w2_1 >= 1.0 && w2_2 >= 1.0 && w1_1 >= 1.0 && w1_2 >= 1.0;
    }
};

/**
 * @brief Low-frequency component for every period with a full K-lag
 * covariate history.
 *
 * x1, x2 hold the covariates for consecutive periods; the result has
 * length x1.size() - K, entry j belonging to period K + j (lags 1..K).
 * Level form throws PositivityViolated when any tau is non-positive.
 */
std::vector<double> long_run_component(const GarchMidasParams& params,
                                       std::span<const double> x1, std::span<const double> x2,
                                       int K, LongRunForm form);

/**
 * @brief Daily variance recursion seeded at its unconditional value 1.
 *
 * std_shock_sq[i] = eps_i^2 / tau applying at day i+1, negative[i] = 1 when
 * eps_i < 0. Output has one more entry than the inputs. Throws
 * NonStationaryParams when alpha + gamma/2 + beta >= 1.
 */
std::vector<double> short_run_recursion(const GarchMidasParams& params,
                                        std::span<const double> std_shock_sq,
                                        std::span<const std::uint8_t> negative);

/// Returns and covariates aligned onto the months with full lag history.
struct GarchMidasDataset {
    std::vector<double> returns;          // daily, usable span only
    std::vector<Date> return_dates;
    std::vector<std::size_t> month_of_day;  // index into months
    std::vector<Date> months;
    // covariate lag rows: lags[t] = {x_{t-1}, ..., x_{t-K}} per covariate
    std::vector<std::vector<double>> cov1_lags;
    std::vector<std::vector<double>> cov2_lags;
    int K = 0;
};

/// Builds the estimation dataset; throws InsufficientData when fewer than
/// K + 12 aligned low-frequency periods are available.
GarchMidasDataset build_garch_midas_dataset(const ReturnSeries& returns,
                                            const TimeSeries& covariate1,
                                            const TimeSeries& covariate2,
                                            const GarchMidasSpec& spec);

/// Gaussian quasi negative log-likelihood; +infinity for inadmissible
/// parameters so optimizers treat them as infeasible.
double garch_midas_nll(const GarchMidasParams& params, const GarchMidasDataset& data,
                       const GarchMidasSpec& spec);

struct GarchMidasFitOptions {
    bool sandwich_std_errors = false;
    bool fix_thetas = false;  // pin theta1 = theta2 = 0 (null long-run model)
    int nm_iterations = 600;
    int polish_iterations = 400;
};

struct GarchMidasFit {
    GarchMidasParams params;
    GarchMidasSpec spec;
    std::vector<std::string> param_names;
    std::vector<double> std_errors;
    double loglik = 0.0;
    bool converged = false;
    // volatility paths on the estimation span
    std::vector<Date> stv_dates;
    std::vector<double> stv;   // daily h
    std::vector<Date> ltv_dates;
    std::vector<double> ltv;   // monthly tau
};

/**
 * @brief Maximum-likelihood fit from a deterministic multi-start grid.
 *
 * Parameters are searched on an unconstrained transform (simplex logits
 * for the persistence block, log offsets for the decay shapes), refined by
 * simplex then quasi-Newton iterations; standard errors come from the
 * numerical Hessian in the original parameter space (outer-product
 * sandwich optional). NoConvergence is reported through the flag, with
 * the best point still returned.
 */
GarchMidasFit fit_garch_midas(const ReturnSeries& returns, const TimeSeries& covariate1,
                              const TimeSeries& covariate2, const GarchMidasSpec& spec,
                              const GarchMidasFitOptions& options = {});

/// The fitted short- and long-run components as date-indexed series.
/// Throws NotFitted unless the fit converged or force is set.
std::pair<TimeSeries, TimeSeries> extract_volatilities(const GarchMidasFit& fit,
                                                       bool force = false);

}  // namespace regimevol
