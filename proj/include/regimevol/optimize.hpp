#pragma once

#include <functional>

#include <Eigen/Dense>

namespace regimevol {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    int max_iterations = 2000;
    double tol_x = 1e-6;      // parameter step
    double tol_f = 1e-8;      // objective step
    double tol_grad = 1e-7;   // relative gradient norm (BFGS)
    double initial_step = 0.25;
};

struct OptimResult {
    Eigen::VectorXd x;
    double f = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

/// Derivative-free simplex search; infeasible points may return +infinity.
OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                        const OptimOptions& options = {});

/// Quasi-Newton search with central-difference gradients and a
/// backtracking line search. Converges on relative gradient norm or when
/// parameter and objective steps fall below tolerance.
OptimResult bfgs(const Objective& f, const Eigen::VectorXd& x0,
                 const OptimOptions& options = {});

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x);

/// Central second differences; steps shrink adaptively when an evaluation
/// lands outside the feasible region (+infinity).
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x);

/// Inverse through LDLT with an escalating ridge when the matrix is not
/// positive definite; used for standard errors from near-singular Hessians.
Eigen::MatrixXd robust_inverse(const Eigen::MatrixXd& H);

}  // namespace regimevol
