#include "regimevol/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace regimevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x, int& evals) {
    ++evals;
    double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

}  // namespace

OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                        const OptimOptions& options) {
    const int n = static_cast<int>(x0.size());
    OptimResult result;
    int evals = 0;

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n) + 1);
    std::vector<double> fx(static_cast<std::size_t>(n) + 1);
    simplex[0] = x0;
    fx[0] = safe_eval(f, x0, evals);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = x0;
        double step = options.initial_step * std::max(1.0, std::abs(x0(i)));
        v(i) += step;
        simplex[static_cast<std::size_t>(i) + 1] = v;
        fx[static_cast<std::size_t>(i) + 1] = safe_eval(f, v, evals);
    }

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&]() {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        sort_simplex();
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        // convergence: simplex diameter and objective spread
        double diam = 0.0;
        for (std::size_t i = 1; i < order.size(); ++i) {
            diam = std::max(diam,
                            (simplex[order[i]] - simplex[best]).cwiseAbs().maxCoeff());
        }
        double spread = std::isfinite(fx[worst]) ? fx[worst] - fx[best] : kInf;
        if (diam < options.tol_x && spread < options.tol_f) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
        centroid /= static_cast<double>(n);

        Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        double f_reflected = safe_eval(f, reflected, evals);
        if (f_reflected < fx[best]) {
            Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            double f_expanded = safe_eval(f, expanded, evals);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                fx[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                fx[worst] = f_reflected;
            }
        } else if (f_reflected < fx[second_worst]) {
            simplex[worst] = reflected;
            fx[worst] = f_reflected;
        } else {
            Eigen::VectorXd contracted;
            if (f_reflected < fx[worst]) {
                contracted = centroid + 0.5 * (reflected - centroid);
            } else {
                contracted = centroid + 0.5 * (simplex[worst] - centroid);
            }
            double f_contracted = safe_eval(f, contracted, evals);
            if (f_contracted < std::min(fx[worst], f_reflected)) {
                simplex[worst] = contracted;
                fx[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i < order.size(); ++i) {
                    std::size_t idx = order[i];
                    simplex[idx] = simplex[best] + 0.5 * (simplex[idx] - simplex[best]);
                    fx[idx] = safe_eval(f, simplex[idx], evals);
                }
            }
        }
    }

    sort_simplex();
    result.x = simplex[order.front()];
    result.f = fx[order.front()];
    result.iterations = iter;
    result.evaluations = evals;
    return result;
}

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    for (int i = 0; i < n; ++i) {
        double h = cbrt_eps * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd xp = x, xm = x;
        double fp = kInf, fm = kInf;
        for (int attempt = 0; attempt < 8; ++attempt) {
            xp(i) = x(i) + h;
            xm(i) = x(i) - h;
            fp = f(xp);
            fm = f(xm);
            if (std::isfinite(fp) && std::isfinite(fm)) break;
            h *= 0.25;
        }
        g(i) = std::isfinite(fp) && std::isfinite(fm) ? (fp - fm) / (2.0 * h) : 0.0;
    }
    return g;
}

OptimResult bfgs(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& options) {
    const int n = static_cast<int>(x0.size());
    OptimResult result;
    int evals = 0;

    Eigen::VectorXd x = x0;
    double fx = safe_eval(f, x, evals);
    if (!std::isfinite(fx)) {
        result.x = x;
        result.f = fx;
        return result;
    }
    Eigen::VectorXd g = numerical_gradient(f, x);
    evals += 2 * n;
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (g.cwiseAbs().maxCoeff() < options.tol_grad * (1.0 + std::abs(fx))) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd direction = -Hinv * g;
        double slope = g.dot(direction);
        if (!(slope < 0.0)) {  // reset when curvature estimate degrades
            Hinv.setIdentity();
            direction = -g;
            slope = g.dot(direction);
            if (!(slope < 0.0)) break;
        }

        // backtracking Armijo line search
        double t = 1.0;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = x + t * direction;
            f_new = safe_eval(f, x_new, evals);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            result.converged = g.cwiseAbs().maxCoeff() < 1e2 * options.tol_grad * (1.0 + std::abs(fx));
            break;
        }

        Eigen::VectorXd g_new = numerical_gradient(f, x_new);
        evals += 2 * n;
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        double sy = s.dot(yv);

        bool small_step = s.cwiseAbs().maxCoeff() < options.tol_x &&
                          std::abs(fx - f_new) < options.tol_f;
        x = x_new;
        fx = f_new;
        g = g_new;
        if (small_step) {
            result.converged = true;
            break;
        }

        if (sy > 1e-12 * s.norm() * yv.norm()) {
            Eigen::VectorXd Hy = Hinv * yv;
            double yHy = yv.dot(Hy);
            Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                    (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
    }

    result.x = x;
    result.f = fx;
    result.iterations = iter;
    result.evaluations = evals;
    return result;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double qrt_eps = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h(i) = qrt_eps * std::max(1.0, std::abs(x(i)));

    auto eval = [&](Eigen::VectorXd point) { return f(point); };

    // shrink steps that would leave the feasible region
    double f0 = eval(x);
    for (int i = 0; i < n; ++i) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::VectorXd xp = x, xm = x;
            xp(i) += h(i);
            xm(i) -= h(i);
            if (std::isfinite(eval(xp)) && std::isfinite(eval(xm))) break;
            h(i) *= 0.25;
        }
    }

    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h(i);
        xm(i) -= h(i);
        double fp = eval(xp);
        double fm = eval(xm);
        H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
            xpp(i) += h(i);
            xpp(j) += h(j);
            xpm(i) += h(i);
            xpm(j) -= h(j);
            xmp(i) -= h(i);
            xmp(j) += h(j);
            xmm(i) -= h(i);
            xmm(j) -= h(j);
            double v = (eval(xpp) - eval(xpm) - eval(xmp) + eval(xmm)) / (4.0 * h(i) * h(j));
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

Eigen::MatrixXd robust_inverse(const Eigen::MatrixXd& H) {
    const Eigen::Index n = H.rows();
    Eigen::MatrixXd sym = 0.5 * (H + H.transpose());
    double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    for (double ridge = 0.0; ridge <= 1e-2; ridge = ridge == 0.0 ? 1e-10 : ridge * 100.0) {
        Eigen::MatrixXd candidate = sym + ridge * scale * Eigen::MatrixXd::Identity(n, n);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(candidate);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
            if (inv.allFinite() && (inv.diagonal().array() > 0.0).all()) return inv;
        }
    }
    // last resort: pseudo-inverse keeps standard errors finite but inflated
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd d = es.eigenvalues();
    double floor_value = 1e-8 * std::max(1.0, d.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 / std::max(d(i), floor_value);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace regimevol
