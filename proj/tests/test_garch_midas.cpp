#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "regimevol/error.hpp"
#include "regimevol/garch_midas.hpp"
#include "regimevol/optimize.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/simulation.hpp"

using namespace regimevol;

namespace {

GarchMidasParams acceptance_truth() {
    GarchMidasParams p;
    p.mu = 0.0;
    p.alpha = 0.05;
    p.gamma = 0.10;
    p.beta = 0.85;
    p.m = 0.1;
    p.theta1 = -0.3;
    p.theta2 = -0.2;
    p.w2_1 = 3.0;
    p.w2_2 = 3.0;
    return p;
}

}  // namespace

TEST_CASE("beta weights: flat case") {
    BetaWeights w = beta_weights(4, 1.0, 1.0);
    for (double v : w.weights) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("beta weights: restricted K=2 w2=2 evaluates the interior grid") {
    BetaWeights w = beta_weights(2, 1.0, 2.0);
    REQUIRE(w.weights.size() == 2);
    CHECK(w.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("beta weights: normalization and monotone decay") {
    for (int K : {1, 3, 12, 36}) {
        for (double w2 : {1.0, 1.5, 3.0, 10.0}) {
            BetaWeights w = beta_weights(K, 1.0, w2);
            double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            for (double v : w.weights) CHECK(v >= 0.0);
            if (w2 > 1.0) {
                for (std::size_t k = 1; k < w.weights.size(); ++k) {
                    CHECK(w.weights[k] < w.weights[k - 1]);
                }
            }
        }
    }
    CHECK_THROWS_AS(beta_weights(4, 0.5, 2.0), Error);
    CHECK_THROWS_AS(beta_weights(0, 1.0, 2.0), Error);
}

TEST_CASE("long-run component: null covariates") {
    GarchMidasParams p;
    p.theta1 = 0.0;
    p.theta2 = 0.0;
    p.m = 0.0;
    std::vector<double> x(10, 1.7);
    SUBCASE("log form gives one") {
        auto tau = long_run_component(p, x, x, 3, LongRunForm::Log);
        REQUIRE(tau.size() == 7);
        for (double t : tau) CHECK(t == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("level form gives the intercept") {
        p.m = 0.5;
        auto tau = long_run_component(p, x, x, 3, LongRunForm::Level);
        for (double t : tau) CHECK(t == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("long-run component: hand-evaluated K=2 level case") {
    GarchMidasParams p;
    p.m = 1.0;
    p.theta1 = 0.1;
    p.theta2 = 0.0;
    p.w2_1 = 1.0;  // flat weights [0.5, 0.5]
    // time order: x_{t-2} = 4, x_{t-1} = 2
    std::vector<double> x1 = {4.0, 2.0, 0.0};
    std::vector<double> x2 = {0.0, 0.0, 0.0};
    auto tau = long_run_component(p, x1, x2, 2, LongRunForm::Level);
    REQUIRE(tau.size() == 1);
    CHECK(tau[0] == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("long-run component: errors") {
    GarchMidasParams p;
    std::vector<double> x(3, 1.0);
    CHECK_THROWS_AS(long_run_component(p, x, x, 5, LongRunForm::Log), Error);
    p.m = -2.0;
    p.theta1 = 0.0;
    p.theta2 = 0.0;
    try {
        long_run_component(p, x, x, 2, LongRunForm::Level);
        FAIL("expected PositivityViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PositivityViolated);
    }
}

TEST_CASE("short-run recursion: zero shocks decay to a0/(1-beta)") {
    GarchMidasParams p;
    p.alpha = 0.05;
    p.gamma = 0.10;
    p.beta = 0.85;
    std::vector<double> shocks(400, 0.0);
    std::vector<std::uint8_t> negative(400, 0);
    auto h = short_run_recursion(p, shocks, negative);
    CHECK(h.front() == doctest::Approx(1.0));
    CHECK(h.back() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("short-run recursion: no leverage means sign symmetry") {
    GarchMidasParams p;
    p.alpha = 0.07;
    p.gamma = 0.0;
    p.beta = 0.9;
    std::vector<double> shocks = {1.21, 0.49, 2.25};
    std::vector<std::uint8_t> pos(3, 0), neg(3, 1);
    auto h_pos = short_run_recursion(p, shocks, pos);
    auto h_neg = short_run_recursion(p, shocks, neg);
    for (std::size_t i = 0; i < h_pos.size(); ++i) {
        CHECK(h_pos[i] == doctest::Approx(h_neg[i]).epsilon(1e-15));
    }
}

TEST_CASE("short-run recursion: boundary persistence rejected") {
    GarchMidasParams p;
    p.alpha = 0.05;
    p.gamma = 0.10;
    p.beta = 0.90;  // 0.05 + 0.05 + 0.90 = 1
    std::vector<double> shocks(3, 0.1);
    std::vector<std::uint8_t> negative(3, 0);
    try {
        short_run_recursion(p, shocks, negative);
        FAIL("expected NonStationaryParams");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonStationaryParams);
    }
}

TEST_CASE("nll reduces to the constant-variance gaussian likelihood") {
    GarchMidasParams truth = acceptance_truth();
    GarchMidasSpec spec;
    spec.K = 6;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 800, 2024);
    GarchMidasDataset data = build_garch_midas_dataset(sim.returns, sim.covariate1,
                                                       sim.covariate2, spec);

    double s2 = 0.0;
    double mu = 0.015;
    for (double r : data.returns) s2 += (r - mu) * (r - mu);
    s2 /= static_cast<double>(data.returns.size());

    GarchMidasParams constant;
    constant.mu = mu;
    constant.alpha = 0.0;
    constant.gamma = 0.0;
    constant.beta = 0.0;
    constant.m = std::log(s2);
    constant.theta1 = 0.0;
    constant.theta2 = 0.0;
    double nll = garch_midas_nll(constant, data, spec);

    double expected = 0.0;
    const double log2pi = std::log(2.0 * std::acos(-1.0));
    for (double r : data.returns) {
        expected += 0.5 * (log2pi + std::log(s2) + (r - mu) * (r - mu) / s2);
    }
    CHECK(nll == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("nll matches an independent step-by-step recomputation") {
    // tiny K=1 dataset laid out by hand
    std::vector<Date> cov_dates = {Date{2020, 1, 1}, Date{2020, 2, 1}, Date{2020, 3, 1}};
    std::vector<double> x1 = {0.5, -0.2, 0.3};
    std::vector<double> x2 = {1.0, 0.0, -1.0};
    TimeSeries cov1(cov_dates, x1, Frequency::Monthly);
    TimeSeries cov2(cov_dates, x2, Frequency::Monthly);

    ReturnSeries returns;
    returns.dates = {Date{2020, 2, 3}, Date{2020, 2, 4}, Date{2020, 3, 2}, Date{2020, 3, 3},
                     Date{2020, 3, 4}};
    returns.returns = {0.3, -0.5, 0.8, 0.1, -0.2};

    GarchMidasSpec spec;
    spec.K = 1;
    GarchMidasParams p;
    p.mu = 0.05;
    p.alpha = 0.06;
    p.gamma = 0.08;
    p.beta = 0.80;
    p.m = 0.1;
    p.theta1 = 0.4;
    p.theta2 = -0.3;
    p.w2_1 = 2.0;
    p.w2_2 = 3.0;

    // independent recursion: K=1 collapses the weights to {1}
    double tau_feb = std::exp(p.m + p.theta1 * x1[0] + p.theta2 * x2[0]);
    double tau_mar = std::exp(p.m + p.theta1 * x1[1] + p.theta2 * x2[1]);
    std::vector<double> tau_of_day = {tau_feb, tau_feb, tau_mar, tau_mar, tau_mar};
    const double a0 = 1.0 - p.alpha - 0.5 * p.gamma - p.beta;
    const double log2pi = std::log(2.0 * std::acos(-1.0));
    double h = 1.0;
    double expected = 0.0;
    for (std::size_t i = 0; i < returns.returns.size(); ++i) {
        double sigma2 = h * tau_of_day[i];
        double eps = returns.returns[i] - p.mu;
        expected += 0.5 * (log2pi + std::log(sigma2) + eps * eps / sigma2);
        if (i + 1 < returns.returns.size()) {
            double arch = p.alpha + (eps < 0.0 ? p.gamma : 0.0);
            h = a0 + arch * eps * eps / tau_of_day[i + 1] + p.beta * h;
        }
    }

    // the dataset builder needs >= 12 usable months, so call the kernel on
    // a hand-built dataset instead
    GarchMidasDataset data;
    data.K = 1;
    data.returns = returns.returns;
    data.return_dates = returns.dates;
    data.month_of_day = {0, 0, 1, 1, 1};
    data.months = {Date{2020, 2, 1}, Date{2020, 3, 1}};
    data.cov1_lags = {{x1[0]}, {x1[1]}};
    data.cov2_lags = {{x2[0]}, {x2[1]}};

    double nll = garch_midas_nll(p, data, spec);
    CHECK(nll == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("nll: constraint violations return infinity") {
    GarchMidasDataset data;
    data.K = 1;
    data.returns = {0.1, -0.1};
    data.return_dates = {Date{2020, 2, 3}, Date{2020, 2, 4}};
    data.month_of_day = {0, 0};
    data.months = {Date{2020, 2, 1}};
    data.cov1_lags = {{0.0}};
    data.cov2_lags = {{0.0}};
    GarchMidasSpec spec;
    spec.K = 1;

    GarchMidasParams p;
    p.alpha = 0.10;
    p.gamma = 0.10;
    p.beta = 0.85;  // persistence 1.0
    CHECK(std::isinf(garch_midas_nll(p, data, spec)));
    p.beta = 0.5;
    p.w2_1 = 0.5;  // invalid shape
    CHECK(std::isinf(garch_midas_nll(p, data, spec)));
}

TEST_CASE("h recursion mean-reverts to one under the model") {
    GarchMidasParams p = acceptance_truth();
    const double a0 = 1.0 - p.persistence();
    Philox4x32 rng(555, 0);
    double h = 1.0;
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        sum += h;
        double eps = std::sqrt(h) * rng.normal();
        double arch = p.alpha + (eps < 0.0 ? p.gamma : 0.0);
        h = a0 + arch * eps * eps + p.beta * h;
    }
    double mean_h = sum / n;
    CHECK(mean_h >= 0.97);
    CHECK(mean_h <= 1.03);
}

TEST_CASE("fit recovers simulated parameters and sits at a stationary point") {
    GarchMidasParams truth = acceptance_truth();
    GarchMidasSpec spec;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 3000, 91);
    GarchMidasFit fit = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec);
    REQUIRE(fit.converged);

    CHECK(std::abs(fit.params.beta - truth.beta) < 0.08);
    CHECK(std::abs(fit.params.alpha - truth.alpha) < 0.05);
    CHECK(std::abs(fit.params.theta1 - truth.theta1) < 0.3);

    // numerical gradient near zero at the optimum, original parameter space
    GarchMidasDataset data = build_garch_midas_dataset(sim.returns, sim.covariate1,
                                                       sim.covariate2, spec);
    Eigen::VectorXd at(9);
    at << fit.params.mu, fit.params.alpha, fit.params.gamma, fit.params.beta, fit.params.m,
        fit.params.theta1, fit.params.theta2, fit.params.w2_1, fit.params.w2_2;
    Objective original = [&](const Eigen::VectorXd& v) {
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
        return garch_midas_nll(p, data, spec);
    };
    double nll = original(at);
    Eigen::VectorXd gradient = numerical_gradient(original, at);
    CHECK(gradient.cwiseAbs().maxCoeff() < 1e-3 * (1.0 + std::abs(nll)));

    // extracted short-run component averages about one
    auto [stv, ltv] = extract_volatilities(fit);
    double mean_h = 0.0;
    for (double v : stv.values()) mean_h += v;
    mean_h /= static_cast<double>(stv.size());
    CHECK(mean_h >= 0.85);
    CHECK(mean_h <= 1.15);
    CHECK(ltv.frequency() == Frequency::Monthly);
    for (double v : stv.values()) CHECK(v > 0.0);
    for (double v : ltv.values()) CHECK(v > 0.0);
}

TEST_CASE("simulated truth reconstruction identity") {
    GarchMidasParams truth = acceptance_truth();
    GarchMidasSpec spec;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 420, 7);
    for (std::size_t i = 0; i < sim.true_sigma2.size(); ++i) {
        std::size_t month = 0;
        while (month + 1 < sim.ltv_dates.size() &&
               !(sim.stv_dates[i] < sim.ltv_dates[month + 1])) {
            ++month;
        }
        CHECK(sim.true_sigma2[i] ==
              doctest::Approx(sim.true_stv[i] * sim.true_ltv[month]).epsilon(1e-12));
    }
}

TEST_CASE("scale equivariance of the fitted model") {
    GarchMidasParams truth = acceptance_truth();
    GarchMidasSpec spec;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 3000, 202);
    GarchMidasFit base = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec);

    const double c = 2.0;
    ReturnSeries scaled = sim.returns;
    for (double& r : scaled.returns) r *= c;
    GarchMidasFit rescaled = fit_garch_midas(scaled, sim.covariate1, sim.covariate2, spec);

    CHECK(rescaled.params.alpha == doctest::Approx(base.params.alpha).epsilon(1e-4));
    CHECK(rescaled.params.gamma == doctest::Approx(base.params.gamma).epsilon(1e-4));
    CHECK(rescaled.params.beta == doctest::Approx(base.params.beta).epsilon(1e-4));
    CHECK(rescaled.params.w2_1 == doctest::Approx(base.params.w2_1).epsilon(5e-3));
    CHECK(rescaled.params.w2_2 == doctest::Approx(base.params.w2_2).epsilon(5e-3));
    // total variance scales by c^2: m shifts by 2 ln c under the log form
    CHECK(rescaled.params.m - base.params.m == doctest::Approx(2.0 * std::log(c)).epsilon(1e-3));
}

TEST_CASE("null-covariate fit agrees with the plain GJR-GARCH route") {
    GarchMidasParams truth;
    truth.mu = 0.02;
    truth.alpha = 0.06;
    truth.gamma = 0.09;
    truth.beta = 0.86;
    truth.m = 0.15;
    truth.theta1 = 0.0;
    truth.theta2 = 0.0;
    GarchMidasSpec spec;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 2500, 333);

    GarchMidasFitOptions options;
    options.fix_thetas = true;
    GarchMidasFit midas = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec,
                                          options);
    GjrGarchFit plain = fit_gjr_garch(sim.returns.returns);

    REQUIRE(midas.converged);
    REQUIRE(plain.converged);
    CHECK(midas.params.alpha == doctest::Approx(plain.alpha).epsilon(2e-3));
    CHECK(std::abs(midas.params.alpha - plain.alpha) < 1e-4);
    CHECK(std::abs(midas.params.gamma - plain.gamma) < 1e-4);
    CHECK(std::abs(midas.params.beta - plain.beta) < 1e-4);
}

TEST_CASE("beta weights with free w1 produce a hump") {
    BetaWeights w = beta_weights(12, 3.0, 3.0);
    auto peak = std::max_element(w.weights.begin(), w.weights.end());
    CHECK(peak != w.weights.begin());
    CHECK(peak != w.weights.end() - 1);
    double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("level form fit recovers on level-form data") {
    GarchMidasParams truth;
    truth.mu = 0.0;
    truth.alpha = 0.05;
    truth.gamma = 0.10;
    truth.beta = 0.85;
    truth.m = 1.0;
    truth.theta1 = -0.05;
    truth.theta2 = 0.05;
    GarchMidasSpec spec;
    spec.form = LongRunForm::Level;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 2000, 404);
    GarchMidasFit fit = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec);
    CHECK(std::abs(fit.params.beta - truth.beta) < 0.1);
    CHECK(std::abs(fit.params.m - truth.m) < 0.5);
    for (double tau : fit.ltv) CHECK(tau > 0.0);
}

TEST_CASE("jointly estimating w1 stays feasible") {
    GarchMidasParams truth = acceptance_truth();
    truth.w1_1 = 2.0;
    truth.w1_2 = 1.0;
    GarchMidasSpec spec;
    spec.estimate_w1 = true;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 2000, 505);
    GarchMidasFit fit = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec);
    REQUIRE(fit.param_names.size() == 11);
    CHECK(fit.params.w1_1 >= 1.0);
    CHECK(fit.params.w1_2 >= 1.0);
    CHECK(std::abs(fit.params.beta - truth.beta) < 0.1);
}

TEST_CASE("sandwich standard errors stay in the same ballpark") {
    GarchMidasParams truth = acceptance_truth();
    GarchMidasSpec spec;
    GarchMidasSimulation sim = simulate_garch_midas(truth, spec, 2000, 606);
    GarchMidasFit hessian_fit = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2, spec);
    GarchMidasFitOptions options;
    options.sandwich_std_errors = true;
    GarchMidasFit sandwich_fit = fit_garch_midas(sim.returns, sim.covariate1, sim.covariate2,
                                                 spec, options);
    for (std::size_t j = 0; j < hessian_fit.std_errors.size(); ++j) {
        double a = hessian_fit.std_errors[j];
        double b = sandwich_fit.std_errors[j];
        REQUIRE(std::isfinite(b));
        CHECK(b > 0.05 * a);  // weakly identified directions diverge most
        CHECK(b < 20.0 * a);
    }
}

TEST_CASE("degenerate input fails loudly rather than fitting") {
    // constant returns carry no volatility signal
    ReturnSeries returns;
    for (int m = 0; m < 30; ++m) {
        for (int d = 1; d <= 15; ++d) {
            returns.dates.push_back(Date{2015 + m / 12, 1 + m % 12, d});
            returns.returns.push_back(0.0);
        }
    }
    std::vector<Date> cov_dates;
    std::vector<double> cov_values;
    for (int m = -14; m < 30; ++m) {
        cov_dates.push_back(Date{2015, 1, 1}.add_months(m));
        cov_values.push_back(0.1 * m);
    }
    TimeSeries cov(cov_dates, cov_values, Frequency::Monthly);
    GarchMidasSpec spec;
    bool threw = false;
    bool flagged = false;
    try {
        GarchMidasFit fit = fit_garch_midas(returns, cov, cov, spec);
        flagged = !fit.converged;
    } catch (const Error&) {
        threw = true;
    }
    CHECK((threw || flagged));
}
