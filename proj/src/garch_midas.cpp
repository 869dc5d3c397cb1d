#include "regimevol/garch_midas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "regimevol/error.hpp"
#include "regimevol/optimize.hpp"
#include "regimevol/stats.hpp"

namespace regimevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double clamped_exp(double x) { return std::exp(std::clamp(x, -40.0, 40.0)); }

}  // namespace

BetaWeights beta_weights(int K, double w1, double w2) {
    if (K < 1) fail(ErrorCode::InvalidParams, "K must be >= 1");
    if (w1 < 1.0 || w2 < 1.0) fail(ErrorCode::InvalidShape, "shape parameters must be >= 1");
    BetaWeights out;
    out.K = K;
    out.w1 = w1;
    out.w2 = w2;
    out.weights.resize(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (int k = 1; k <= K; ++k) {
        double u = static_cast<double>(k) / (K + 1.0);
        double w = std::pow(u, w1 - 1.0) * std::pow(1.0 - u, w2 - 1.0);
        out.weights[static_cast<std::size_t>(k - 1)] = w;
        sum += w;
    }
    for (double& w : out.weights) w /= sum;
    return out;
}

std::vector<double> long_run_component(const GarchMidasParams& params,
                                       std::span<const double> x1, std::span<const double> x2,
                                       int K, LongRunForm form) {
    if (x1.size() != x2.size()) {
        fail(ErrorCode::InvalidParams, "covariate histories must have equal length");
    }
    if (x1.size() < static_cast<std::size_t>(K) + 1) {
        fail(ErrorCode::InsufficientHistory, "need more than K periods of covariate history");
    }
    BetaWeights phi1 = beta_weights(K, params.w1_1, params.w2_1);
    BetaWeights phi2 = beta_weights(K, params.w1_2, params.w2_2);

    std::vector<double> tau;
    tau.reserve(x1.size() - static_cast<std::size_t>(K));
    for (std::size_t t = static_cast<std::size_t>(K); t < x1.size(); ++t) {
        double s = params.m;
        for (int k = 1; k <= K; ++k) {
            s += params.theta1 * phi1.weights[static_cast<std::size_t>(k - 1)] *
                 x1[t - static_cast<std::size_t>(k)];
            s += params.theta2 * phi2.weights[static_cast<std::size_t>(k - 1)] *
                 x2[t - static_cast<std::size_t>(k)];
        }
        double value = form == LongRunForm::Log ? std::exp(s) : s;
        if (form == LongRunForm::Level && !(value > 0.0)) {
            fail(ErrorCode::PositivityViolated,
                 "level-form long-run component non-positive at period " + std::to_string(t));
        }
        tau.push_back(value);
    }
    return tau;
}

std::vector<double> short_run_recursion(const GarchMidasParams& params,
                                        std::span<const double> std_shock_sq,
                                        std::span<const std::uint8_t> negative) {
    if (std_shock_sq.size() != negative.size()) {
        fail(ErrorCode::InvalidParams, "shock and sign sequences must have equal length");
    }
    if (!(params.persistence() < 1.0)) {
        fail(ErrorCode::NonStationaryParams, "alpha + gamma/2 + beta must be below 1");
    }
    const double a0 = 1.0 - params.persistence();
    std::vector<double> h(std_shock_sq.size() + 1);
    h[0] = 1.0;
    for (std::size_t i = 0; i < std_shock_sq.size(); ++i) {
        double arch = params.alpha + (negative[i] ? params.gamma : 0.0);
        h[i + 1] = a0 + arch * std_shock_sq[i] + params.beta * h[i];
    }
    return h;
}

GarchMidasDataset build_garch_midas_dataset(const ReturnSeries& returns,
                                            const TimeSeries& covariate1,
                                            const TimeSeries& covariate2,
                                            const GarchMidasSpec& spec) {
    if (covariate1.frequency() != Frequency::Monthly ||
        covariate2.frequency() != Frequency::Monthly) {
        fail(ErrorCode::FrequencyMismatch, "covariates must be monthly series");
    }
    if (returns.dates.empty()) fail(ErrorCode::EmptySeries, "no returns");

    std::map<int, double> second;
    for (std::size_t i = 0; i < covariate2.size(); ++i) {
        second[covariate2.date(i).month_key()] = covariate2.value(i);
    }
    // months observed in both covariates
    std::map<int, std::pair<double, double>> joint;
    for (std::size_t i = 0; i < covariate1.size(); ++i) {
        int key = covariate1.date(i).month_key();
        auto it = second.find(key);
        if (it != second.end()) joint[key] = {covariate1.value(i), it->second};
    }

    auto has_full_history = [&](int key) {
        for (int k = 1; k <= spec.K; ++k) {
            if (!joint.count(key - k)) return false;
        }
        return true;
    };

    GarchMidasDataset data;
    data.K = spec.K;
    std::map<int, std::size_t> month_index;
    for (std::size_t i = 0; i < returns.dates.size(); ++i) {
        int key = returns.dates[i].month_key();
        auto it = month_index.find(key);
        if (it == month_index.end()) {
            if (!has_full_history(key)) continue;
            month_index[key] = data.months.size();
            data.months.push_back(Date::from_month_key(key));
            std::vector<double> l1(static_cast<std::size_t>(spec.K));
            std::vector<double> l2(static_cast<std::size_t>(spec.K));
            for (int k = 1; k <= spec.K; ++k) {
                const auto& xs = joint.at(key - k);
                l1[static_cast<std::size_t>(k - 1)] = xs.first;
                l2[static_cast<std::size_t>(k - 1)] = xs.second;
            }
            data.cov1_lags.push_back(std::move(l1));
            data.cov2_lags.push_back(std::move(l2));
            it = month_index.find(key);
        }
        data.returns.push_back(returns.returns[i]);
        data.return_dates.push_back(returns.dates[i]);
        data.month_of_day.push_back(it->second);
    }

    if (data.months.size() < 12) {
        fail(ErrorCode::InsufficientData,
             "need at least K + 12 aligned low-frequency periods, usable months = " +
                 std::to_string(data.months.size()));
    }
    return data;
}

namespace {

// tau per dataset month; empty vector signals an inadmissible point
std::vector<double> tau_path(const GarchMidasParams& params, const GarchMidasDataset& data,
                             const GarchMidasSpec& spec) {
    BetaWeights phi1 = beta_weights(spec.K, params.w1_1, params.w2_1);
    BetaWeights phi2 = beta_weights(spec.K, params.w1_2, params.w2_2);
    std::vector<double> tau(data.months.size());
    for (std::size_t t = 0; t < data.months.size(); ++t) {
        double s = params.m;
        const auto& l1 = data.cov1_lags[t];
        const auto& l2 = data.cov2_lags[t];
        for (int k = 0; k < spec.K; ++k) {
            s += params.theta1 * phi1.weights[static_cast<std::size_t>(k)] *
                 l1[static_cast<std::size_t>(k)];
            s += params.theta2 * phi2.weights[static_cast<std::size_t>(k)] *
                 l2[static_cast<std::size_t>(k)];
        }
        if (!std::isfinite(s) || std::abs(s) > 40.0) return {};
        double value = spec.form == LongRunForm::Log ? std::exp(s) : s;
        if (!(value > 0.0)) return {};
        tau[t] = value;
    }
    return tau;
}

double nll_impl(const GarchMidasParams& params, const GarchMidasDataset& data,
                const GarchMidasSpec& spec, std::vector<double>* h_out,
                std::vector<double>* tau_out, std::vector<double>* per_obs) {
    if (!params.admissible()) return kInf;
    std::vector<double> tau = tau_path(params, data, spec);
    if (tau.empty()) return kInf;

    const double a0 = 1.0 - params.persistence();
    const std::size_t n = data.returns.size();
    double h = 1.0;
    double nll = 0.0;
    if (h_out) h_out->resize(n);
    if (per_obs) per_obs->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double tau_i = tau[data.month_of_day[i]];
        double sigma2 = h * tau_i;
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return kInf;
        double eps = data.returns[i] - params.mu;
        double contribution = 0.5 * (kLog2Pi + std::log(sigma2) + eps * eps / sigma2);
        nll += contribution;
        if (h_out) (*h_out)[i] = h;
        if (per_obs) (*per_obs)[i] = contribution;
        if (i + 1 < n) {
            double tau_next = tau[data.month_of_day[i + 1]];
            double arch = params.alpha + (eps < 0.0 ? params.gamma : 0.0);
            h = a0 + arch * eps * eps / tau_next + params.beta * h;
        }
    }
    if (!std::isfinite(nll)) return kInf;
    if (tau_out) *tau_out = std::move(tau);
    return nll;
}

// ---- unconstrained transform ------------------------------------------
//
// order: mu, [simplex logits a, g, b], m, theta1, theta2, log(w2-1) x2,
// optionally log(w1-1) x2

int param_count(const GarchMidasSpec& spec) { return spec.estimate_w1 ? 11 : 9; }

GarchMidasParams from_unconstrained(const Eigen::VectorXd& u, const GarchMidasSpec& spec) {
    GarchMidasParams p;
    p.mu = u(0);
    double ea = clamped_exp(u(1));
    double eg = clamped_exp(u(2));
    double eb = clamped_exp(u(3));
    double d = 1.0 + ea + eg + eb;
    p.alpha = ea / d;
    p.gamma = 2.0 * eg / d;
    p.beta = eb / d;
    p.m = u(4);
    p.theta1 = u(5);
    p.theta2 = u(6);
    p.w2_1 = 1.0 + clamped_exp(u(7));
    p.w2_2 = 1.0 + clamped_exp(u(8));
    if (spec.estimate_w1) {
        p.w1_1 = 1.0 + clamped_exp(u(9));
        p.w1_2 = 1.0 + clamped_exp(u(10));
    }
    return p;
}

Eigen::VectorXd to_unconstrained(const GarchMidasParams& p, const GarchMidasSpec& spec) {
    Eigen::VectorXd u(param_count(spec));
    double rest = std::max(1.0 - p.persistence(), 1e-8);
    auto safe_log = [](double x) { return std::log(std::max(x, 1e-10)); };
    u(0) = p.mu;
    u(1) = safe_log(p.alpha / rest);
    u(2) = safe_log(0.5 * p.gamma / rest);
    u(3) = safe_log(p.beta / rest);
    u(4) = p.m;
    u(5) = p.theta1;
    u(6) = p.theta2;
    u(7) = safe_log(p.w2_1 - 1.0);
    u(8) = safe_log(p.w2_2 - 1.0);
    if (spec.estimate_w1) {
        u(9) = safe_log(p.w1_1 - 1.0);
        u(10) = safe_log(p.w1_2 - 1.0);
    }
    return u;
}

Eigen::VectorXd params_vector(const GarchMidasParams& p, const GarchMidasSpec& spec) {
    Eigen::VectorXd v(param_count(spec));
    v(0) = p.mu;
    v(1) = p.alpha;
    v(2) = p.gamma;
    v(3) = p.beta;
    v(4) = p.m;
    v(5) = p.theta1;
    v(6) = p.theta2;
    v(7) = p.w2_1;
    v(8) = p.w2_2;
    if (spec.estimate_w1) {
        v(9) = p.w1_1;
        v(10) = p.w1_2;
    }
    return v;
}

GarchMidasParams params_from_vector(const Eigen::VectorXd& v, const GarchMidasSpec& spec) {
    GarchMidasParams p;
    p.mu = v(0);
    p.alpha = v(1);
    p.gamma = v(2);
    p.beta = v(3);
    p.m = v(4);
    p.theta1 = v(5);
    p.theta2 = v(6);
    p.w2_1 = v(7);
    p.w2_2 = v(8);
    if (spec.estimate_w1) {
        p.w1_1 = v(9);
        p.w1_2 = v(10);
    }
    return p;
}

std::vector<std::string> parameter_names(const GarchMidasSpec& spec) {
    std::vector<std::string> names = {"mu", "alpha", "gamma", "beta", "m",
                                      "theta1", "theta2", "w2_1", "w2_2"};
    if (spec.estimate_w1) {
        names.push_back("w1_1");
        names.push_back("w1_2");
    }
    return names;
}

}  // namespace

double garch_midas_nll(const GarchMidasParams& params, const GarchMidasDataset& data,
                       const GarchMidasSpec& spec) {
    return nll_impl(params, data, spec, nullptr, nullptr, nullptr);
}

GarchMidasFit fit_garch_midas(const ReturnSeries& returns, const TimeSeries& covariate1,
                              const TimeSeries& covariate2, const GarchMidasSpec& spec,
                              const GarchMidasFitOptions& options) {
    GarchMidasDataset data = build_garch_midas_dataset(returns, covariate1, covariate2, spec);

    const double rbar = mean(data.returns);
    const double rvar = std::max(variance(data.returns), 1e-8);
    double sx1 = 0.0, sx2 = 0.0;
    {
        std::vector<double> x1, x2;
        for (const auto& row : data.cov1_lags) x1.insert(x1.end(), row.begin(), row.end());
        for (const auto& row : data.cov2_lags) x2.insert(x2.end(), row.begin(), row.end());
        sx1 = std::max(std_dev(x1), 1e-6);
        sx2 = std::max(std_dev(x2), 1e-6);
    }
    const double m_base = spec.form == LongRunForm::Log ? std::log(rvar) : rvar;
    const double m_step = spec.form == LongRunForm::Log ? 0.7 : 0.5 * rvar;

    // three-point grid per parameter: low / mid / high
    struct Grid {
        double lo, mid, hi;
    };
    std::vector<Grid> grid = {
        {rbar - 0.1, rbar, rbar + 0.1},              // mu
        {0.02, 0.05, 0.10},                          // alpha
        {0.02, 0.08, 0.16},                          // gamma
        {0.70, 0.86, 0.93},                          // beta
        {m_base - m_step, m_base, m_base + m_step},  // m
        {-0.5 / sx1, 0.0, 0.5 / sx1},                // theta1
        {-0.5 / sx2, 0.0, 0.5 / sx2},                // theta2
        {1.5, 3.0, 8.0},                             // w2_1
        {1.5, 3.0, 8.0},                             // w2_2
    };
    if (spec.estimate_w1) {
        grid.push_back({1.2, 2.0, 4.0});  // w1_1
        grid.push_back({1.2, 2.0, 4.0});  // w1_2
    }
    const int np = param_count(spec);

    auto grid_point = [&](int vary, int which) {
        Eigen::VectorXd v(np);
        for (int j = 0; j < np; ++j) {
            const Grid& g = grid[static_cast<std::size_t>(j)];
            double value = g.mid;
            if (vary == -2) value = g.lo;
            if (vary == -3) value = g.hi;
            if (vary == j) value = which == 0 ? g.lo : g.hi;
            v(j) = value;
        }
        return v;
    };

    std::vector<Eigen::VectorXd> candidates;
    candidates.push_back(grid_point(-1, 0));  // all mid
    candidates.push_back(grid_point(-2, 0));  // all low
    candidates.push_back(grid_point(-3, 0));  // all high
    for (int j = 0; j < np; ++j) {
        candidates.push_back(grid_point(j, 0));
        candidates.push_back(grid_point(j, 1));
    }

    // optionally pin the covariate loadings at zero (their unconstrained
    // coordinates are the identity, so dropping them fixes theta = 0)
    std::vector<int> active;
    for (int j = 0; j < np; ++j) {
        if (options.fix_thetas && (j == 5 || j == 6)) continue;
        active.push_back(j);
    }
    const int na = static_cast<int>(active.size());
    auto expand = [&](const Eigen::VectorXd& reduced) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(np);
        for (int j = 0; j < na; ++j) full(active[static_cast<std::size_t>(j)]) = reduced(j);
        return full;
    };
    auto shrink = [&](const Eigen::VectorXd& full) {
        Eigen::VectorXd reduced(na);
        for (int j = 0; j < na; ++j) reduced(j) = full(active[static_cast<std::size_t>(j)]);
        return reduced;
    };

    Objective objective = [&](const Eigen::VectorXd& u) {
        return garch_midas_nll(from_unconstrained(expand(u), spec), data, spec);
    };

    std::vector<std::pair<double, Eigen::VectorXd>> ranked;
    for (const auto& v : candidates) {
        Eigen::VectorXd full = v;
        if (options.fix_thetas) {
            full(5) = 0.0;
            full(6) = 0.0;
        }
        Eigen::VectorXd u = shrink(to_unconstrained(params_from_vector(full, spec), spec));
        ranked.emplace_back(objective(u), u);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    OptimOptions nm_options;
    nm_options.max_iterations = options.nm_iterations;
    OptimResult best;
    best.f = kInf;
    const std::size_t n_refine = std::min<std::size_t>(3, ranked.size());
    for (std::size_t i = 0; i < n_refine; ++i) {
        if (!std::isfinite(ranked[i].first)) continue;
        OptimResult r = nelder_mead(objective, ranked[i].second, nm_options);
        if (r.f < best.f) best = r;
    }
    if (!std::isfinite(best.f)) {
        fail(ErrorCode::InsufficientData, "no feasible starting point for the likelihood");
    }

    OptimOptions polish_options;
    polish_options.max_iterations = options.polish_iterations;
    OptimResult polished = bfgs(objective, best.x, polish_options);
    bool converged = polished.converged;
    if (polished.f > best.f) {  // keep the simplex point if polishing stalled
        polished = best;
        converged = best.converged;
    }

    GarchMidasFit fit;
    fit.spec = spec;
    fit.params = from_unconstrained(expand(polished.x), spec);
    fit.param_names = parameter_names(spec);
    fit.converged = converged;

    std::vector<double> h_path, tau, per_obs;
    double nll = nll_impl(fit.params, data, spec, &h_path, &tau, &per_obs);
    fit.loglik = -nll;

    // standard errors in the original parameter space (active block only)
    Eigen::VectorXd at_full = params_vector(fit.params, spec);
    Objective original = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd full = at_full;
        for (int j = 0; j < na; ++j) full(active[static_cast<std::size_t>(j)]) = v(j);
        return garch_midas_nll(params_from_vector(full, spec), data, spec);
    };
    Eigen::VectorXd at = shrink(at_full);
    Eigen::MatrixXd hessian = numerical_hessian(original, at);
    Eigen::MatrixXd cov_active = robust_inverse(hessian);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
    for (int a = 0; a < na; ++a) {
        for (int b = 0; b < na; ++b) {
            cov(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]) =
                cov_active(a, b);
        }
    }
    if (options.sandwich_std_errors) {
        // outer product of per-observation score contributions
        const std::size_t n = data.returns.size();
        Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), np);
        const double step = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 3.0);
        for (int j = 0; j < np; ++j) {
            double hj = step * std::max(1.0, std::abs(at_full(j)));
            Eigen::VectorXd vp = at_full, vm = at_full;
            vp(j) += hj;
            vm(j) -= hj;
            std::vector<double> fp, fm;
            double fpv = nll_impl(params_from_vector(vp, spec), data, spec, nullptr, nullptr, &fp);
            double fmv = nll_impl(params_from_vector(vm, spec), data, spec, nullptr, nullptr, &fm);
            if (!std::isfinite(fpv) || !std::isfinite(fmv) || fp.size() != n || fm.size() != n) {
                scores.col(j).setZero();  // perturbation left the feasible set
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                scores(static_cast<Eigen::Index>(i), j) = (fp[i] - fm[i]) / (2.0 * hj);
            }
        }
        Eigen::MatrixXd opg = scores.transpose() * scores;
        cov = cov * opg * cov;
    }
    fit.std_errors.resize(static_cast<std::size_t>(np));
    for (int j = 0; j < np; ++j) {
        double v = cov(j, j);
        fit.std_errors[static_cast<std::size_t>(j)] = v > 0.0 ? std::sqrt(v) : std::nan("");
    }

    fit.stv_dates = data.return_dates;
    fit.stv = std::move(h_path);
    fit.ltv_dates = data.months;
    fit.ltv = std::move(tau);
    return fit;
}

std::pair<TimeSeries, TimeSeries> extract_volatilities(const GarchMidasFit& fit, bool force) {
    if (!fit.converged && !force) {
        fail(ErrorCode::NotFitted, "fit did not converge; pass force to extract anyway");
    }
    if (fit.stv.empty() || fit.ltv.empty()) fail(ErrorCode::NotFitted, "fit has no paths");
    TimeSeries stv(fit.stv_dates, fit.stv, Frequency::Daily);
    TimeSeries ltv(fit.ltv_dates, fit.ltv, Frequency::Monthly);
    return {std::move(stv), std::move(ltv)};
}

}  // namespace regimevol
