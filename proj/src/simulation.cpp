#include "regimevol/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "regimevol/error.hpp"
#include "regimevol/markov_switching.hpp"
#include "regimevol/optimize.hpp"
#include "regimevol/quantile_regression.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/stats.hpp"

namespace regimevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kDaysPerMonth = 21;
constexpr int kBaseMonthKey = 2008 * 12;  // months counted from 2008-01

// unit-variance AR(1), persistence rho, exact stationary start
std::vector<double> ar1_path(int n, double rho, Philox4x32& rng) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double scale = std::sqrt(1.0 - rho * rho);
    x[0] = rng.normal();
    for (int t = 1; t < n; ++t) {
        x[static_cast<std::size_t>(t)] = rho * x[static_cast<std::size_t>(t - 1)] +
                                         scale * rng.normal();
    }
    return x;
}

Date day_in_month(int month_key, int day_index) {
    Date d = Date::from_month_key(month_key);
    d.day = day_index + 1;  // synthetic trading days 1..21
    return d;
}

}  // namespace

GarchMidasSimulation simulate_garch_midas(const GarchMidasParams& params,
                                          const GarchMidasSpec& spec, int n_days,
                                          std::uint64_t seed) {
    if (!params.admissible()) fail(ErrorCode::InvalidParams, "parameters violate constraints");
    if (n_days < kDaysPerMonth) fail(ErrorCode::InvalidParams, "n_days too small");

    const int n_months = (n_days + kDaysPerMonth - 1) / kDaysPerMonth;
    const int total_months = n_months + spec.K;

    Philox4x32 z_rng(seed, 0);
    Philox4x32 x1_rng(seed, 1);
    Philox4x32 x2_rng(seed, 2);
    std::vector<double> x1 = ar1_path(total_months, 0.9, x1_rng);
    std::vector<double> x2 = ar1_path(total_months, 0.9, x2_rng);

    std::vector<double> tau = long_run_component(params, x1, x2, spec.K, spec.form);

    std::vector<Date> cov_dates;
    for (int t = 0; t < total_months; ++t) {
        cov_dates.push_back(Date::from_month_key(kBaseMonthKey - spec.K + t));
    }
    GarchMidasSimulation sim{ReturnSeries{},
                             TimeSeries(cov_dates, x1, Frequency::Monthly),
                             TimeSeries(std::move(cov_dates), x2, Frequency::Monthly),
                             {},
                             {},
                             {},
                             {},
                             {}};

    const double a0 = 1.0 - params.persistence();
    double h = 1.0;
    double eps_prev = 0.0;
    bool have_prev = false;
    int produced = 0;
    for (int t = 0; t < n_months && produced < n_days; ++t) {
        double tau_t = tau[static_cast<std::size_t>(t)];
        for (int i = 0; i < kDaysPerMonth && produced < n_days; ++i) {
            if (have_prev) {
                double arch = params.alpha + (eps_prev < 0.0 ? params.gamma : 0.0);
                h = a0 + arch * eps_prev * eps_prev / tau_t + params.beta * h;
            }
            double sigma2 = h * tau_t;
            double eps = std::sqrt(sigma2) * z_rng.normal();
            Date d = day_in_month(kBaseMonthKey + t, i);
            sim.returns.dates.push_back(d);
            sim.returns.returns.push_back(params.mu + eps);
            sim.stv_dates.push_back(d);
            sim.true_stv.push_back(h);
            sim.true_sigma2.push_back(sigma2);
            eps_prev = eps;
            have_prev = true;
            ++produced;
        }
        sim.ltv_dates.push_back(Date::from_month_key(kBaseMonthKey + t));
        sim.true_ltv.push_back(tau_t);
    }
    return sim;
}

MsrSimulation simulate_msr(const std::vector<Eigen::VectorXd>& beta,
                           const Eigen::VectorXd& sigma, const Eigen::MatrixXd& P, int T,
                           std::uint64_t seed) {
    const int M = static_cast<int>(beta.size());
    if (M < 2 || sigma.size() != M || P.rows() != M || P.cols() != M) {
        fail(ErrorCode::InvalidParams, "inconsistent regime dimensions");
    }
    for (Eigen::Index i = 0; i < M; ++i) {
        double row = P.row(i).sum();
        if (std::abs(row - 1.0) > 1e-9 || P.row(i).minCoeff() < 0.0) {
            fail(ErrorCode::InvalidParams, "transition matrix rows must be distributions");
        }
    }
    const Eigen::Index kx = beta.front().size();

    Philox4x32 rng(seed, 0);
    MsrSimulation sim;
    sim.y.resize(T);
    sim.X.resize(T, kx);
    sim.regimes.resize(static_cast<std::size_t>(T));

    auto draw_from = [&](const Eigen::VectorXd& probabilities) {
        double u = rng.uniform01();
        double acc = 0.0;
        for (int m = 0; m < M; ++m) {
            acc += probabilities(m);
            if (u <= acc) return m;
        }
        return M - 1;
    };

    Eigen::VectorXd pi = ergodic_distribution(P);
    int state = draw_from(pi);
    for (int t = 0; t < T; ++t) {
        if (t > 0) state = draw_from(P.row(state).transpose());
        sim.regimes[static_cast<std::size_t>(t)] = state;
        sim.X(t, 0) = 1.0;
        for (Eigen::Index j = 1; j < kx; ++j) sim.X(t, j) = rng.normal();
        double mu = sim.X.row(t).dot(beta[static_cast<std::size_t>(state)]);
        sim.y(t) = mu + sigma(state) * rng.normal();
    }
    return sim;
}

LinearSimulation simulate_location_shift(int n, std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    LinearSimulation sim;
    sim.true_intercept = 1.0;
    sim.true_slope = 1.0;
    sim.y.resize(n);
    sim.X.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sim.X(i, 0) = 1.0;
        sim.X(i, 1) = x;
        sim.y(i) = 1.0 + x + rng.normal();
    }
    return sim;
}

LinearSimulation simulate_location_scale(int n, std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    LinearSimulation sim;
    sim.true_intercept = 1.0;
    sim.true_slope = 1.0;
    sim.y.resize(n);
    sim.X.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(0.5, 2.5);
        sim.X(i, 0) = 1.0;
        sim.X(i, 1) = x;
        sim.y(i) = 1.0 + x + x * rng.normal();
    }
    return sim;
}

std::vector<double> simulate_random_walk(int n, std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    std::vector<double> y(static_cast<std::size_t>(n));
    double level = 0.0;
    for (int t = 0; t < n; ++t) {
        level += rng.normal();
        y[static_cast<std::size_t>(t)] = level;
    }
    return y;
}

std::vector<double> simulate_white_noise(int n, std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) y[static_cast<std::size_t>(t)] = rng.normal();
    return y;
}

std::vector<double> simulate_mean_shift(int n, std::vector<std::size_t> breaks, double shift,
                                        std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> y(static_cast<std::size_t>(n));
    double level = 0.0;
    std::size_t next_break = 0;
    for (int t = 0; t < n; ++t) {
        if (next_break < breaks.size() && static_cast<std::size_t>(t) > breaks[next_break]) {
            level += shift;
            ++next_break;
        }
        y[static_cast<std::size_t>(t)] = level + rng.normal();
    }
    return y;
}

std::vector<double> simulate_garch11(int n, double alpha, double beta, std::uint64_t seed) {
    if (!(alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0)) {
        fail(ErrorCode::InvalidParams, "alpha + beta must be below 1");
    }
    Philox4x32 rng(seed, 0);
    const double omega = 1.0 - alpha - beta;  // unit unconditional variance
    std::vector<double> y(static_cast<std::size_t>(n));
    double h = 1.0;
    double eps = 0.0;
    for (int t = 0; t < n; ++t) {
        if (t > 0) h = omega + alpha * eps * eps + beta * h;
        eps = std::sqrt(h) * rng.normal();
        y[static_cast<std::size_t>(t)] = eps;
    }
    return y;
}

BruteForceQr brute_force_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tau) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n > 9 || p > 3) fail(ErrorCode::TooLarge, "brute force restricted to n <= 9, p <= 3");
    if (!(tau > 0.0 && tau < 1.0)) fail(ErrorCode::InvalidTau, "tau must lie in (0,1)");

    BruteForceQr best;
    best.objective = kInf;

    std::vector<Eigen::Index> subset(static_cast<std::size_t>(p));
    auto evaluate = [&]() {
        Eigen::MatrixXd S(p, p);
        Eigen::VectorXd ys(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            S.row(j) = X.row(subset[static_cast<std::size_t>(j)]);
            ys(j) = y(subset[static_cast<std::size_t>(j)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
        if (!lu.isInvertible()) return;  // collinear subset: skip
        Eigen::VectorXd beta = lu.solve(ys);
        double objective = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            objective += check_loss(y(i) - X.row(i).dot(beta), tau);
        }
        if (objective < best.objective) {
            best.objective = objective;
            best.beta = beta;
        }
    };

    // enumerate p-subsets in lexicographic order
    std::function<void(Eigen::Index, Eigen::Index)> recurse = [&](Eigen::Index start,
                                                                  Eigen::Index depth) {
        if (depth == p) {
            evaluate();
            return;
        }
        for (Eigen::Index i = start; i <= n - (p - depth); ++i) {
            subset[static_cast<std::size_t>(depth)] = i;
            recurse(i + 1, depth + 1);
        }
    };
    recurse(0, 0);

    if (!std::isfinite(best.objective)) {
        fail(ErrorCode::RankDeficient, "every observation subset was collinear");
    }
    return best;
}

CriticalValues mc_critical_values(UnitRootTestKind kind, int n, DeterministicTerms terms,
                                  int reps, std::uint64_t seed, int max_lags) {
    if (reps < 10000) fail(ErrorCode::InvalidParams, "need at least 10000 replications");
    std::vector<double> stats(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        Philox4x32 rng(seed, static_cast<std::uint64_t>(r) + 1);
        std::vector<double> y(static_cast<std::size_t>(n));
        double level = 0.0;
        for (int t = 0; t < n; ++t) {
            level += rng.normal();
            y[static_cast<std::size_t>(t)] = level;
        }
        if (kind == UnitRootTestKind::Adf) {
            stats[static_cast<std::size_t>(r)] = adf_test(y, terms, max_lags).statistic;
        } else {
            stats[static_cast<std::size_t>(r)] = pp_test(y, terms).statistic;
        }
    }
    std::sort(stats.begin(), stats.end());
    CriticalValues cv;
    cv.pct1 = quantile(stats, 0.01);
    cv.pct5 = quantile(stats, 0.05);
    cv.pct10 = quantile(stats, 0.10);
    return cv;
}

namespace {

struct GjrTransform {
    // mu, log omega, simplex logits for (alpha, gamma/2, beta)
    static GjrGarchFit params(const Eigen::VectorXd& u) {
        GjrGarchFit p;
        p.mu = u(0);
        p.omega = std::exp(std::clamp(u(1), -40.0, 40.0));
        double ea = std::exp(std::clamp(u(2), -40.0, 40.0));
        double eg = std::exp(std::clamp(u(3), -40.0, 40.0));
        double eb = std::exp(std::clamp(u(4), -40.0, 40.0));
        double d = 1.0 + ea + eg + eb;
        p.alpha = ea / d;
        p.gamma = 2.0 * eg / d;
        p.beta = eb / d;
        return p;
    }

    static Eigen::VectorXd unconstrained(double mu, double omega, double alpha, double gamma,
                                         double beta) {
        Eigen::VectorXd u(5);
        double rest = std::max(1.0 - alpha - 0.5 * gamma - beta, 1e-8);
        auto safe_log = [](double x) { return std::log(std::max(x, 1e-10)); };
        u(0) = mu;
        u(1) = safe_log(omega);
        u(2) = safe_log(alpha / rest);
        u(3) = safe_log(0.5 * gamma / rest);
        u(4) = safe_log(beta / rest);
        return u;
    }
};

double gjr_nll(const GjrGarchFit& p, std::span<const double> r) {
    double persistence = p.alpha + 0.5 * p.gamma + p.beta;
    if (!(p.omega > 0.0) || p.alpha < 0.0 || p.beta < 0.0 || p.alpha + p.gamma < 0.0 ||
        !(persistence < 1.0)) {
        return kInf;
    }
    double h = p.omega / (1.0 - persistence);  // unconditional start
    double nll = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (!(h > 0.0) || !std::isfinite(h)) return kInf;
        double eps = r[t] - p.mu;
        nll += 0.5 * (kLog2Pi + std::log(h) + eps * eps / h);
        double arch = p.alpha + (eps < 0.0 ? p.gamma : 0.0);
        h = p.omega + arch * eps * eps + p.beta * h;
    }
    return std::isfinite(nll) ? nll : kInf;
}

}  // namespace

GjrGarchFit fit_gjr_garch(std::span<const double> returns) {
    if (returns.size() < 50) fail(ErrorCode::InsufficientData, "need at least 50 returns");
    const double rbar = mean(returns);
    const double rvar = std::max(variance(returns), 1e-8);

    Objective objective = [&](const Eigen::VectorXd& u) {
        return gjr_nll(GjrTransform::params(u), returns);
    };

    struct Grid {
        double lo, mid, hi;
    };
    std::vector<Grid> grid = {
        {rbar - 0.1, rbar, rbar + 0.1},
        {0.02 * rvar, 0.05 * rvar, 0.15 * rvar},  // omega
        {0.02, 0.05, 0.10},                       // alpha
        {0.02, 0.08, 0.16},                       // gamma
        {0.70, 0.86, 0.93},                       // beta
    };
    std::vector<Eigen::VectorXd> starts;
    auto point = [&](int vary, int which) {
        double v[5];
        for (int j = 0; j < 5; ++j) {
            const Grid& g = grid[static_cast<std::size_t>(j)];
            v[j] = g.mid;
            if (vary == -2) v[j] = g.lo;
            if (vary == -3) v[j] = g.hi;
            if (vary == j) v[j] = which == 0 ? g.lo : g.hi;
        }
        return GjrTransform::unconstrained(v[0], v[1], v[2], v[3], v[4]);
    };
    starts.push_back(point(-1, 0));
    starts.push_back(point(-2, 0));
    starts.push_back(point(-3, 0));
    for (int j = 0; j < 5; ++j) {
        starts.push_back(point(j, 0));
        starts.push_back(point(j, 1));
    }

    std::stable_sort(starts.begin(), starts.end(),
                     [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                         return objective(a) < objective(b);
                     });

    OptimOptions nm_options;
    nm_options.max_iterations = 500;
    OptimResult best;
    best.f = kInf;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, starts.size()); ++i) {
        OptimResult r = nelder_mead(objective, starts[i], nm_options);
        if (r.f < best.f) best = r;
    }
    OptimOptions polish;
    polish.max_iterations = 400;
    OptimResult refined = bfgs(objective, best.x, polish);
    bool converged = refined.converged;
    if (refined.f > best.f) {
        refined = best;
        converged = best.converged;
    }

    GjrGarchFit fit = GjrTransform::params(refined.x);
    fit.loglik = -refined.f;
    fit.converged = converged;
    return fit;
}

}  // namespace regimevol
