#include "regimevol/markov_switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "regimevol/error.hpp"
#include "regimevol/linreg.hpp"
#include "regimevol/optimize.hpp"
#include "regimevol/rng.hpp"

namespace regimevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

bool constant_driver(const Eigen::MatrixXd* E) {
    return E == nullptr;  // default driver is a single intercept column
}

Eigen::MatrixXd constant_transition(const MsrParams& params) {
    Eigen::VectorXd one(1);
    one(0) = 1.0;
    return transition_logit(one, params.psi);
}

// reported matrix: the constant one, or the matrix at the mean driver
Eigen::MatrixXd representative_transition(const MsrParams& params, const Eigen::MatrixXd* E) {
    if (constant_driver(E)) return constant_transition(params);
    return transition_logit(E->colwise().mean().transpose(), params.psi);
}

}  // namespace

Eigen::MatrixXd transition_logit(const Eigen::VectorXd& e_prev,
                                 const std::vector<Eigen::MatrixXd>& psi) {
    const int M = static_cast<int>(psi.size());
    if (M < 2) fail(ErrorCode::InvalidParams, "need at least two regimes");
    Eigen::MatrixXd P(M, M);
    for (int i = 0; i < M; ++i) {
        if (psi[static_cast<std::size_t>(i)].rows() != M - 1 ||
            psi[static_cast<std::size_t>(i)].cols() != e_prev.size()) {
            fail(ErrorCode::InvalidParams, "psi dimensions do not match the driver");
        }
        Eigen::VectorXd logits(M);
        for (int j = 0; j < M - 1; ++j) {
            logits(j) = psi[static_cast<std::size_t>(i)].row(j).dot(e_prev);
        }
        logits(M - 1) = 0.0;  // identification: last regime normalized
        double shift = logits.maxCoeff();
        double denom = 0.0;
        for (int j = 0; j < M; ++j) denom += std::exp(logits(j) - shift);
        for (int j = 0; j < M; ++j) P(i, j) = std::exp(logits(j) - shift) / denom;
    }
    return P;
}

Eigen::VectorXd ergodic_distribution(const Eigen::MatrixXd& P) {
    const int M = static_cast<int>(P.rows());
    // solve (I - P' + 11') pi = 1
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M) - P.transpose() +
                        Eigen::MatrixXd::Ones(M, M);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(M);
    Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
    for (int i = 0; i < M; ++i) pi(i) = std::max(pi(i), 0.0);
    double s = pi.sum();
    if (!(s > 0.0)) return Eigen::VectorXd::Constant(M, 1.0 / M);
    return pi / s;
}

std::vector<double> expected_durations(const Eigen::MatrixXd& P) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        double stay = P(i, i);
        out.push_back(stay >= 1.0 ? kInf : 1.0 / (1.0 - stay));
    }
    return out;
}

HamiltonFilterResult hamilton_filter(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& Z, const MsrParams& params,
                                     const Eigen::MatrixXd* E, const Eigen::VectorXd* initial) {
    const Eigen::Index T = y.size();
    const int M = static_cast<int>(params.beta.size());
    if (M < 2) fail(ErrorCode::InvalidParams, "need at least two regimes");
    if (X.rows() != T) fail(ErrorCode::InvalidParams, "X rows do not match y");
    const bool has_z = Z.size() > 0;
    if (has_z && Z.rows() != T) fail(ErrorCode::InvalidParams, "Z rows do not match y");
    if (E && E->rows() != T) fail(ErrorCode::InvalidParams, "E rows do not match y");

    // regime means and log-density constants
    Eigen::MatrixXd mu(T, M);
    for (int m = 0; m < M; ++m) {
        mu.col(m) = X * params.beta[static_cast<std::size_t>(m)];
    }
    if (has_z) {
        Eigen::VectorXd zpart = Z * params.phi;
        for (int m = 0; m < M; ++m) mu.col(m) += zpart;
    }
    std::vector<double> log_sigma(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        double s = params.sigma(m);
        if (!(s > 0.0)) fail(ErrorCode::InvalidParams, "sigma must be positive");
        log_sigma[static_cast<std::size_t>(m)] = std::log(s);
    }

    Eigen::MatrixXd P;
    Eigen::VectorXd prior;
    if (constant_driver(E)) {
        P = constant_transition(params);
        prior = ergodic_distribution(P);
    } else {
        prior = Eigen::VectorXd::Constant(M, 1.0 / M);
    }
    if (initial) {
        if (initial->size() != M) fail(ErrorCode::InvalidParams, "initial distribution size");
        prior = *initial;
    }

    HamiltonFilterResult result;
    result.filtered.resize(T, M);
    result.predicted.resize(T, M);
    double loglik = 0.0;
    Eigen::VectorXd xi = prior;

    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            if (!constant_driver(E)) {
                // row t-1 of E drives the transition into period t
                P = transition_logit(E->row(t - 1).transpose(), params.psi);
            }
            xi = P.transpose() * xi;
        }
        result.predicted.row(t) = xi.transpose();

        // combine prior and Gaussian densities in log space
        double best = -kInf;
        Eigen::VectorXd logjoint(M);
        for (int m = 0; m < M; ++m) {
            double z = (y(t) - mu(t, m)) / params.sigma(m);
            double ld = -0.5 * kLog2Pi - log_sigma[static_cast<std::size_t>(m)] - 0.5 * z * z;
            double lp = xi(m) > 0.0 ? std::log(xi(m)) : -kInf;
            logjoint(m) = lp + ld;
            best = std::max(best, logjoint(m));
        }
        if (!std::isfinite(best)) {
            fail(ErrorCode::DegenerateDensity,
                 "all regime densities vanished at t=" + std::to_string(t));
        }
        double sum = 0.0;
        for (int m = 0; m < M; ++m) sum += std::exp(logjoint(m) - best);
        loglik += best + std::log(sum);
        for (int m = 0; m < M; ++m) xi(m) = std::exp(logjoint(m) - best) / sum;
        result.filtered.row(t) = xi.transpose();
    }
    result.loglik = loglik;
    return result;
}

Eigen::MatrixXd kim_smoother(const HamiltonFilterResult& filter, const MsrParams& params,
                             const Eigen::MatrixXd* E) {
    const Eigen::Index T = filter.filtered.rows();
    const Eigen::Index M = filter.filtered.cols();
    Eigen::MatrixXd smoothed(T, M);
    smoothed.row(T - 1) = filter.filtered.row(T - 1);
    Eigen::MatrixXd P;
    if (constant_driver(E)) P = constant_transition(params);
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        if (!constant_driver(E)) {
            P = transition_logit(E->row(t).transpose(), params.psi);
        }
        Eigen::VectorXd ratio(M);
        for (Eigen::Index j = 0; j < M; ++j) {
            double pred = filter.predicted(t + 1, j);
            ratio(j) = pred > 0.0 ? smoothed(t + 1, j) / pred : 0.0;
        }
        for (Eigen::Index i = 0; i < M; ++i) {
            smoothed(t, i) = filter.filtered(t, i) * P.row(i).dot(ratio);
        }
        double s = smoothed.row(t).sum();
        if (s > 0.0) smoothed.row(t) /= s;
    }
    return smoothed;
}

// ---- estimation ---------------------------------------------------------

namespace {

struct Layout {
    int M = 0;
    Eigen::Index kx = 0, kz = 0, ke = 1;
    bool switching_variance = true;

    int n_beta() const { return M * static_cast<int>(kx); }
    int n_sigma() const { return switching_variance ? M : 1; }
    int n_psi() const { return M * (M - 1) * static_cast<int>(ke); }
    int total() const {
        return n_beta() + static_cast<int>(kz) + n_sigma() + n_psi();
    }
};

MsrParams unpack(const Eigen::VectorXd& u, const Layout& layout) {
    MsrParams p;
    int pos = 0;
    for (int m = 0; m < layout.M; ++m) {
        p.beta.push_back(u.segment(pos, layout.kx));
        pos += static_cast<int>(layout.kx);
    }
    p.phi = u.segment(pos, layout.kz);
    pos += static_cast<int>(layout.kz);
    p.sigma.resize(layout.M);
    if (layout.switching_variance) {
        for (int m = 0; m < layout.M; ++m) p.sigma(m) = std::exp(std::clamp(u(pos++), -30.0, 30.0));
    } else {
        double s = std::exp(std::clamp(u(pos++), -30.0, 30.0));
        p.sigma.setConstant(s);
    }
    for (int i = 0; i < layout.M; ++i) {
        Eigen::MatrixXd block(layout.M - 1, layout.ke);
        for (int j = 0; j < layout.M - 1; ++j) {
            for (Eigen::Index c = 0; c < layout.ke; ++c) block(j, c) = u(pos++);
        }
        p.psi.push_back(std::move(block));
    }
    return p;
}

Eigen::VectorXd pack(const MsrParams& p, const Layout& layout) {
    Eigen::VectorXd u(layout.total());
    int pos = 0;
    for (int m = 0; m < layout.M; ++m) {
        u.segment(pos, layout.kx) = p.beta[static_cast<std::size_t>(m)];
        pos += static_cast<int>(layout.kx);
    }
    u.segment(pos, layout.kz) = p.phi;
    pos += static_cast<int>(layout.kz);
    if (layout.switching_variance) {
        for (int m = 0; m < layout.M; ++m) u(pos++) = std::log(p.sigma(m));
    } else {
        u(pos++) = std::log(p.sigma(0));
    }
    for (int i = 0; i < layout.M; ++i) {
        for (int j = 0; j < layout.M - 1; ++j) {
            for (Eigen::Index c = 0; c < layout.ke; ++c) {
                u(pos++) = p.psi[static_cast<std::size_t>(i)](j, c);
            }
        }
    }
    return u;
}

// relabel so that sigma_1 >= sigma_2 >= ...: regime 1 is high volatility
MsrParams relabel_descending_sigma(const MsrParams& p) {
    const int M = static_cast<int>(p.beta.size());
    std::vector<int> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return p.sigma(a) > p.sigma(b); });

    MsrParams out;
    out.phi = p.phi;
    out.sigma.resize(M);
    for (int m = 0; m < M; ++m) {
        out.beta.push_back(p.beta[static_cast<std::size_t>(order[static_cast<std::size_t>(m)])]);
        out.sigma(m) = p.sigma(order[static_cast<std::size_t>(m)]);
    }
    // psi rows follow the origin regime; within a row the logits are
    // re-expressed against the relabeled last regime
    const Eigen::Index ke = p.psi.front().cols();
    for (int i = 0; i < M; ++i) {
        const Eigen::MatrixXd& src = p.psi[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        auto logit_row = [&](int j) -> Eigen::RowVectorXd {
            // original logit vector of target regime j (last one is zero)
            if (j == M - 1) return Eigen::RowVectorXd::Zero(ke);
            return src.row(j);
        };
        Eigen::RowVectorXd base = logit_row(order[static_cast<std::size_t>(M - 1)]);
        Eigen::MatrixXd block(M - 1, ke);
        for (int j = 0; j < M - 1; ++j) {
            block.row(j) = logit_row(order[static_cast<std::size_t>(j)]) - base;
        }
        out.psi.push_back(std::move(block));
    }
    return out;
}

}  // namespace

MsrFit evaluate_msr(const MsrSpec& spec, const MsrParams& params, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                    const Eigen::MatrixXd* E) {
    MsrFit fit;
    fit.spec = spec;
    fit.params = params;
    HamiltonFilterResult filter = hamilton_filter(y, X, Z, params, E);
    fit.filtered = filter.filtered;
    fit.smoothed = kim_smoother(filter, params, E);
    fit.loglik = filter.loglik;
    fit.transition = representative_transition(params, E);
    fit.durations = expected_durations(fit.transition);
    fit.converged = true;
    return fit;
}

MsrFit fit_msr(const MsrSpec& spec, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const Eigen::MatrixXd& Z, const Eigen::MatrixXd* E,
               const MsrFitOptions& options) {
    const Eigen::Index T = y.size();
    Layout layout;
    layout.M = spec.n_regimes;
    layout.kx = X.cols();
    layout.kz = Z.size() > 0 ? Z.cols() : 0;
    layout.ke = E ? E->cols() : 1;
    layout.switching_variance = spec.switching_variance;
    if (layout.M < 2 || layout.M > 4) {
        fail(ErrorCode::InvalidParams, "supported regime counts are 2..4");
    }
    if (T < 10L * layout.total()) {
        fail(ErrorCode::InsufficientData,
             "need T >= 10 * parameters (" + std::to_string(10L * layout.total()) +
                 "), have " + std::to_string(T));
    }

    // base point: pooled OLS
    Eigen::MatrixXd design(T, layout.kx + layout.kz);
    design.leftCols(layout.kx) = X;
    if (layout.kz > 0) design.rightCols(layout.kz) = Z;
    OlsFit base = ols(design, y);
    const double sigma_base = std::sqrt(std::max(base.sigma2, 1e-12));

    Objective objective = [&](const Eigen::VectorXd& u) -> double {
        MsrParams p = unpack(u, layout);
        try {
            return -hamilton_filter(y, X, Z, p, E).loglik;
        } catch (const Error&) {
            return kInf;
        }
    };

    MsrFit fit;
    fit.spec = spec;

    OptimResult best;
    best.f = kInf;
    bool best_converged = false;
    for (int start = 0; start < options.n_starts; ++start) {
        Philox4x32 rng(options.seed, static_cast<std::uint64_t>(start));
        MsrParams p0;
        for (int m = 0; m < layout.M; ++m) {
            Eigen::VectorXd b = base.coef.head(layout.kx);
            for (Eigen::Index j = 0; j < layout.kx; ++j) {
                double spread = (m == 0 ? 1.0 : -1.0) * 0.5 * sigma_base;
                b(j) += spread * (start % 2 == 0 && j == 0 ? 1.0 : 0.0) +
                        0.3 * sigma_base * rng.normal();
            }
            p0.beta.push_back(b);
        }
        p0.phi = layout.kz > 0 ? Eigen::VectorXd(base.coef.tail(layout.kz))
                               : Eigen::VectorXd(0);
        p0.sigma.resize(layout.M);
        for (int m = 0; m < layout.M; ++m) {
            double factor = std::pow(1.8, static_cast<double>(layout.M - 1 - 2 * m) / 2.0);
            p0.sigma(m) = sigma_base * factor * std::exp(0.3 * rng.normal());
        }
        for (int i = 0; i < layout.M; ++i) {
            Eigen::MatrixXd block = Eigen::MatrixXd::Zero(layout.M - 1, layout.ke);
            for (int j = 0; j < layout.M - 1; ++j) {
                // favor staying in the current regime: p_ii around 0.9
                block(j, 0) = (j == i ? 2.2 : -1.1) + 0.5 * rng.normal();
            }
            p0.psi.push_back(block);
        }

        if (options.permute_start_labels) {
            std::reverse(p0.beta.begin(), p0.beta.end());
            p0.sigma.reverseInPlace();
            // rebuild row logits so the permuted start encodes the same
            // transition structure with regime labels reversed
            std::vector<Eigen::MatrixXd> reversed;
            const int M = layout.M;
            for (int i = M - 1; i >= 0; --i) {
                const Eigen::MatrixXd& src = p0.psi[static_cast<std::size_t>(i)];
                auto logit_row = [&](int j) -> Eigen::RowVectorXd {
                    if (j == M - 1) return Eigen::RowVectorXd::Zero(layout.ke);
                    return src.row(j);
                };
                Eigen::RowVectorXd pivot = logit_row(0);  // new last regime
                Eigen::MatrixXd block(M - 1, layout.ke);
                for (int j = 0; j < M - 1; ++j) {
                    block.row(j) = logit_row(M - 1 - j) - pivot;
                }
                reversed.push_back(std::move(block));
            }
            p0.psi = std::move(reversed);
        }
        Eigen::VectorXd u0 = pack(p0, layout);
        fit.start_logliks.push_back(-objective(u0));

        OptimOptions nm_options;
        nm_options.max_iterations = options.nm_iterations;
        OptimResult stage1 = nelder_mead(objective, u0, nm_options);
        OptimOptions polish_options;
        polish_options.max_iterations = options.polish_iterations;
        OptimResult stage2 = bfgs(objective, stage1.x, polish_options);
        const OptimResult& candidate = stage2.f <= stage1.f ? stage2 : stage1;
        bool cand_converged = stage2.f <= stage1.f ? stage2.converged : stage1.converged;
        if (candidate.f < best.f) {
            best = candidate;
            best_converged = cand_converged;
        }
    }
    if (!std::isfinite(best.f)) {
        fail(ErrorCode::NoConvergence, "no feasible likelihood point found");
    }

    MsrParams fitted = relabel_descending_sigma(unpack(best.x, layout));
    Eigen::VectorXd u_hat = pack(fitted, layout);

    fit.params = fitted;
    fit.loglik = -best.f;
    fit.converged = best_converged;
    HamiltonFilterResult filter = hamilton_filter(y, X, Z, fitted, E);
    fit.filtered = filter.filtered;
    fit.smoothed = kim_smoother(filter, fitted, E);
    fit.transition = representative_transition(fitted, E);
    fit.durations = expected_durations(fit.transition);

    // report-space estimates: regime coefficients, phi, sigmas, and (for
    // the constant-driver case) the transition diagonal
    auto report = [&](const Eigen::VectorXd& u) {
        MsrParams p = unpack(u, layout);
        std::vector<double> values;
        for (int m = 0; m < layout.M; ++m) {
            for (Eigen::Index j = 0; j < layout.kx; ++j) {
                values.push_back(p.beta[static_cast<std::size_t>(m)](j));
            }
        }
        for (Eigen::Index j = 0; j < layout.kz; ++j) values.push_back(p.phi(j));
        for (int m = 0; m < layout.M; ++m) values.push_back(p.sigma(m));
        if (constant_driver(E)) {
            Eigen::MatrixXd P = constant_transition(p);
            for (int i = 0; i < layout.M; ++i) values.push_back(P(i, i));
        }
        return values;
    };

    auto name_of = [&](Eigen::Index j, const std::vector<std::string>& names,
                       const char* prefix) {
        if (j < static_cast<Eigen::Index>(names.size())) return names[static_cast<std::size_t>(j)];
        return std::string(prefix) + std::to_string(j);
    };
    for (int m = 0; m < layout.M; ++m) {
        for (Eigen::Index j = 0; j < layout.kx; ++j) {
            fit.param_names.push_back("regime" + std::to_string(m + 1) + "." +
                                      name_of(j, spec.switching_names, "x"));
        }
    }
    for (Eigen::Index j = 0; j < layout.kz; ++j) {
        fit.param_names.push_back(name_of(j, spec.nonswitching_names, "z"));
    }
    for (int m = 0; m < layout.M; ++m) {
        fit.param_names.push_back("sigma" + std::to_string(m + 1));
    }
    if (constant_driver(E)) {
        for (int i = 0; i < layout.M; ++i) {
            fit.param_names.push_back("p" + std::to_string(i + 1) + std::to_string(i + 1));
        }
    }
    fit.estimates = report(u_hat);

    // delta method: covariance in the unconstrained space mapped through
    // the report transform
    Eigen::MatrixXd hessian = numerical_hessian(objective, u_hat);
    Eigen::MatrixXd cov_u = robust_inverse(hessian);
    const int nr = static_cast<int>(fit.estimates.size());
    const int nu = layout.total();
    Eigen::MatrixXd jac(nr, nu);
    const double step = 1e-5;
    for (int j = 0; j < nu; ++j) {
        Eigen::VectorXd up = u_hat, um = u_hat;
        double hj = step * std::max(1.0, std::abs(u_hat(j)));
        up(j) += hj;
        um(j) -= hj;
        std::vector<double> rp = report(up);
        std::vector<double> rm = report(um);
        for (int i = 0; i < nr; ++i) {
            jac(i, j) = (rp[static_cast<std::size_t>(i)] - rm[static_cast<std::size_t>(i)]) /
                        (2.0 * hj);
        }
    }
    Eigen::MatrixXd cov_r = jac * cov_u * jac.transpose();
    fit.std_errors.resize(static_cast<std::size_t>(nr));
    for (int i = 0; i < nr; ++i) {
        double v = cov_r(i, i);
        fit.std_errors[static_cast<std::size_t>(i)] = v > 0.0 ? std::sqrt(v) : std::nan("");
    }
    return fit;
}

Eigen::MatrixXd smoothed_probabilities(const MsrFit& fit) {
    if (fit.smoothed.size() == 0) fail(ErrorCode::NotFitted, "fit holds no smoothed path");
    return fit.smoothed;
}

}  // namespace regimevol
