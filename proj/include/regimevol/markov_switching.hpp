#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regimevol {

/**
 * @brief Regime-switching regression specification.
 *
 * y_t = x_t' beta_m + z_t' phi + sigma_m eps_t with an unobserved Markov
 * regime m. Transition probabilities follow row-wise multinomial logits in
 * exogenous drivers E_{t-1}; the default single-intercept driver gives
 * constant transitions.
 */
struct MsrSpec {
    int n_regimes = 2;
    bool switching_variance = true;
    std::vector<std::string> switching_names;     // for reports; may be empty
    std::vector<std::string> nonswitching_names;
};

struct MsrParams {
    std::vector<Eigen::VectorXd> beta;  // one vector per regime
    Eigen::VectorXd phi;                // non-switching coefficients (may be empty)
    Eigen::VectorXd sigma;              // per-regime residual sd, > 0
    // psi[i] is (M-1) x kE: logit coefficients of row i against the last
    // regime; with kE = 1 (intercept driver) transitions are constant.
    std::vector<Eigen::MatrixXd> psi;
};

/// Row-stochastic transition matrix from logit coefficients evaluated at
/// driver value e_prev; softmax per row with the last regime normalized to
/// zero, computed with max-subtraction so it never overflows.
Eigen::MatrixXd transition_logit(const Eigen::VectorXd& e_prev,
                                 const std::vector<Eigen::MatrixXd>& psi);

/// Stationary distribution of a constant transition matrix.
Eigen::VectorXd ergodic_distribution(const Eigen::MatrixXd& P);

/// duration_i = 1 / (1 - p_ii); +infinity for an absorbing regime.
std::vector<double> expected_durations(const Eigen::MatrixXd& P);

struct HamiltonFilterResult {
    Eigen::MatrixXd filtered;   // T x M, rows sum to 1
    Eigen::MatrixXd predicted;  // T x M, prior before observing y_t
    double loglik = 0.0;
};

/**
 * @brief Forward predict/update recursion over regime probabilities.
 *
 * Prior: ergodic distribution when transitions are constant, uniform
 * otherwise. Gaussian measurement densities are combined in log space;
 * DegenerateDensity is raised only if every regime underflows at some t.
 * E has one row per observation (row t drives the transition into t) and
 * defaults to an intercept column.
 */
HamiltonFilterResult hamilton_filter(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& Z, const MsrParams& params,
                                     const Eigen::MatrixXd* E = nullptr,
                                     const Eigen::VectorXd* initial = nullptr);

/// Backward (Kim) smoother over filter output; rows sum to 1.
Eigen::MatrixXd kim_smoother(const HamiltonFilterResult& filter, const MsrParams& params,
                             const Eigen::MatrixXd* E = nullptr);

struct MsrFit {
    MsrSpec spec;
    MsrParams params;
    Eigen::MatrixXd transition;            // constant-driver case: the matrix itself
    Eigen::MatrixXd filtered;              // T x M
    Eigen::MatrixXd smoothed;              // T x M
    double loglik = 0.0;
    std::vector<double> durations;         // per regime
    std::vector<std::string> param_names;
    std::vector<double> estimates;         // report-space parameter values
    std::vector<double> std_errors;        // aligned with param_names
    std::vector<double> start_logliks;     // loglik at each multi-start point
    bool converged = false;
};

struct MsrFitOptions {
    int n_starts = 8;
    std::uint64_t seed = 20240901;
    int nm_iterations = 150;
    int polish_iterations = 400;
    bool permute_start_labels = false;  // reverse regime order in every start
};

/**
 * @brief Filtered maximum likelihood over unconstrained transforms
 * (log sigma, row logits), multi-start quasi-Newton, regimes relabeled by
 * descending sigma so regime 1 is the high-volatility one.
 *
 * Requires T >= 10 * (parameter count); InsufficientData otherwise.
 */
MsrFit fit_msr(const MsrSpec& spec, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const Eigen::MatrixXd& Z = Eigen::MatrixXd(),
               const Eigen::MatrixXd* E = nullptr, const MsrFitOptions& options = {});

/// Filter + smoother at fixed parameters, no optimization; useful for
/// evaluating collapse cases and for tests.
MsrFit evaluate_msr(const MsrSpec& spec, const MsrParams& params, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z = Eigen::MatrixXd(),
                    const Eigen::MatrixXd* E = nullptr);

/// Smoothed probabilities of an existing fit (NotFitted when empty).
Eigen::MatrixXd smoothed_probabilities(const MsrFit& fit);

}  // namespace regimevol
