#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "regimevol/diagnostics.hpp"
#include "regimevol/garch_midas.hpp"
#include "regimevol/time_series.hpp"

namespace regimevol {

/**
 * Seeded generators with known ground truth plus brute-force reference
 * solvers. Everything here is a pure function of (parameters, seed): the
 * random source is the Philox4x32-10 counter generator, with replication
 * r drawing from stream (seed, r), so serial and parallel runs agree
 * exactly.
 */

struct GarchMidasSimulation {
    ReturnSeries returns;
    TimeSeries covariate1;
    TimeSeries covariate2;
    std::vector<Date> stv_dates;
    std::vector<double> true_stv;      // daily h
    std::vector<Date> ltv_dates;
    std::vector<double> true_ltv;      // monthly tau
    std::vector<double> true_sigma2;   // daily h * tau
};

/// Forward simulation of the two-covariate model. Covariates are unit
/// variance AR(1) with persistence 0.9; months have 21 trading days, the
/// output is truncated to n_days. Throws InvalidParams when the parameters
/// violate the model constraints.
GarchMidasSimulation simulate_garch_midas(const GarchMidasParams& params,
                                          const GarchMidasSpec& spec, int n_days,
                                          std::uint64_t seed);

struct MsrSimulation {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;              // first column is an intercept
    std::vector<int> regimes;       // true path
};

/// Regime chain drawn from P starting at the ergodic distribution;
/// y_t = x_t' beta_m + sigma_m eps_t with standard normal regressors.
MsrSimulation simulate_msr(const std::vector<Eigen::VectorXd>& beta,
                           const Eigen::VectorXd& sigma, const Eigen::MatrixXd& P, int T,
                           std::uint64_t seed);

struct LinearSimulation {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;              // [1, x]
    double true_intercept = 0.0;
    double true_slope = 0.0;
};

/// y = 1 + x + e with iid noise: every conditional quantile has slope 1.
LinearSimulation simulate_location_shift(int n, std::uint64_t seed);

/// y = 1 + x + x e with x > 0: the tau-quantile slope is 1 + q_tau,
/// strictly increasing in tau.
LinearSimulation simulate_location_scale(int n, std::uint64_t seed);

std::vector<double> simulate_random_walk(int n, std::uint64_t seed);
std::vector<double> simulate_white_noise(int n, std::uint64_t seed);
/// Unit-variance noise with the mean stepping by `shift` at each break.
std::vector<double> simulate_mean_shift(int n, std::vector<std::size_t> breaks, double shift,
                                        std::uint64_t seed);
/// Zero-mean GARCH(1,1) path for ARCH-LM power checks.
std::vector<double> simulate_garch11(int n, double alpha, double beta, std::uint64_t seed);

struct BruteForceQr {
    Eigen::VectorXd beta;
    double objective = 0.0;
};

/// Exhaustive reference for quantile regression: solves the exact
/// interpolation system for every p-subset of observations and returns
/// the subset minimizing the check loss. Restricted to n <= 9, p <= 3
/// (TooLarge beyond); collinear subsets are skipped.
BruteForceQr brute_force_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau);

enum class UnitRootTestKind { Adf, Pp };

/// Empirical null quantiles of a unit-root test statistic under a
/// driftless random walk; validates the tabulated response surface.
CriticalValues mc_critical_values(UnitRootTestKind kind, int n, DeterministicTerms terms,
                                  int reps, std::uint64_t seed, int max_lags = 0);

/// Independent plain GJR-GARCH(1,1) estimator used as the second route of
/// the reduction check against the null-covariate mixed-frequency fit.
struct GjrGarchFit {
    double mu = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double loglik = 0.0;
    bool converged = false;
};

GjrGarchFit fit_gjr_garch(std::span<const double> returns);

}  // namespace regimevol
