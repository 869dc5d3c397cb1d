#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "regimevol/error.hpp"
#include "regimevol/linreg.hpp"
#include "regimevol/markov_switching.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/simulation.hpp"

using namespace regimevol;

namespace {

MsrParams two_regime_params(double b1, double b2, double s1, double s2, double p11, double p22) {
    MsrParams p;
    p.beta = {Eigen::VectorXd::Constant(1, b1), Eigen::VectorXd::Constant(1, b2)};
    p.phi = Eigen::VectorXd(0);
    p.sigma = Eigen::VectorXd(2);
    p.sigma << s1, s2;
    Eigen::MatrixXd psi0(1, 1), psi1(1, 1);
    psi0(0, 0) = std::log(p11 / (1.0 - p11));
    psi1(0, 0) = std::log((1.0 - p22) / p22);
    p.psi = {psi0, psi1};
    return p;
}

std::vector<Eigen::VectorXd> acceptance_beta() {
    Eigen::VectorXd b1(2), b2(2);
    b1 << 1.0, 0.5;
    b2 << -1.0, 0.2;
    return {b1, b2};
}

}  // namespace

TEST_CASE("transition logit: zero coefficients give uniform rows") {
    std::vector<Eigen::MatrixXd> psi = {Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1),
                                        Eigen::MatrixXd::Zero(2, 1)};
    Eigen::VectorXd e(1);
    e << 1.0;
    Eigen::MatrixXd P = transition_logit(e, psi);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(P(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("transition logit: ln 9 inverts to 0.9") {
    std::vector<Eigen::MatrixXd> psi = {Eigen::MatrixXd::Constant(1, 1, std::log(9.0)),
                                        Eigen::MatrixXd::Zero(1, 1)};
    Eigen::VectorXd e(1);
    e << 1.0;
    Eigen::MatrixXd P = transition_logit(e, psi);
    CHECK(P(0, 0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(P(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("transition logit: rows sum to one for random coefficients") {
    Philox4x32 rng(77, 0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::MatrixXd> psi;
        for (int i = 0; i < 3; ++i) {
            Eigen::MatrixXd block(2, 2);
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) block(r, c) = 5.0 * rng.normal();
            }
            psi.push_back(block);
        }
        Eigen::VectorXd e(2);
        e << 1.0, rng.normal();
        Eigen::MatrixXd P = transition_logit(e, psi);
        for (int i = 0; i < 3; ++i) {
            CHECK(P.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(P.row(i).minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("ergodic distribution solves pi = P' pi") {
    Eigen::MatrixXd P(2, 2);
    P << 0.9, 0.1, 0.5, 0.5;
    Eigen::VectorXd pi = ergodic_distribution(P);
    CHECK(pi(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(pi(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("expected durations") {
    Eigen::MatrixXd P(2, 2);
    P << 0.5, 0.5, 0.05, 0.95;
    auto d = expected_durations(P);
    CHECK(d[0] == doctest::Approx(2.0));
    CHECK(d[1] == doctest::Approx(20.0));
    Eigen::MatrixXd absorbing(2, 2);
    absorbing << 1.0, 0.0, 0.0, 1.0;
    auto d2 = expected_durations(absorbing);
    CHECK(std::isinf(d2[0]));
    CHECK(std::isinf(d2[1]));
}

TEST_CASE("filter: indistinguishable regimes collapse to the ergodic prior") {
    MsrParams p = two_regime_params(0.4, 0.4, 1.3, 1.3, 0.9, 0.8);
    Philox4x32 rng(5, 0);
    const int T = 200;
    Eigen::VectorXd y(T);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(T, 1);
    for (int t = 0; t < T; ++t) y(t) = 0.4 + 1.3 * rng.normal();

    HamiltonFilterResult filter = hamilton_filter(y, X, Eigen::MatrixXd(), p);
    Eigen::VectorXd pi = ergodic_distribution(transition_logit(Eigen::VectorXd::Ones(1), p.psi));
    for (int t = 0; t < T; ++t) {
        CHECK(filter.filtered(t, 0) == doctest::Approx(pi(0)).epsilon(1e-10));
        CHECK(filter.filtered(t, 1) == doctest::Approx(pi(1)).epsilon(1e-10));
    }

    // loglik equals the single-regime gaussian loglik
    double expected = 0.0;
    const double log2pi = std::log(2.0 * std::acos(-1.0));
    for (int t = 0; t < T; ++t) {
        double z = (y(t) - 0.4) / 1.3;
        expected += -0.5 * log2pi - std::log(1.3) - 0.5 * z * z;
    }
    CHECK(filter.loglik == doctest::Approx(expected).epsilon(1e-8));

    // smoothed probabilities collapse too
    Eigen::MatrixXd smoothed = kim_smoother(filter, p);
    for (int t = 0; t < T; ++t) {
        CHECK(smoothed(t, 0) == doctest::Approx(pi(0)).epsilon(1e-10));
    }
}

TEST_CASE("filter and smoother match a hand recursion on a T=3 toy") {
    MsrParams p = two_regime_params(0.0, 2.0, 1.0, 0.5, 0.8, 0.7);
    Eigen::VectorXd y(3);
    y << 0.5, 1.9, -0.2;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);

    HamiltonFilterResult filter = hamilton_filter(y, X, Eigen::MatrixXd(), p);

    // independent recursion with explicit arithmetic
    auto density = [](double value, double mu, double sigma) {
        double z = (value - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
    };
    double P[2][2] = {{0.8, 0.2}, {0.3, 0.7}};
    // ergodic prior of the chain: pi0 = p21 / (p12 + p21)
    double pi0 = 0.3 / (0.2 + 0.3);
    double prior[2] = {pi0, 1.0 - pi0};
    double loglik = 0.0;
    double expect_filtered[3][2];
    double predicted[3][2];
    double filtered[2] = {0.0, 0.0};
    for (int t = 0; t < 3; ++t) {
        double pred[2];
        if (t == 0) {
            pred[0] = prior[0];
            pred[1] = prior[1];
        } else {
            pred[0] = P[0][0] * filtered[0] + P[1][0] * filtered[1];
            pred[1] = P[0][1] * filtered[0] + P[1][1] * filtered[1];
        }
        predicted[t][0] = pred[0];
        predicted[t][1] = pred[1];
        double joint0 = pred[0] * density(y(t), 0.0, 1.0);
        double joint1 = pred[1] * density(y(t), 2.0, 0.5);
        double total = joint0 + joint1;
        loglik += std::log(total);
        filtered[0] = joint0 / total;
        filtered[1] = joint1 / total;
        expect_filtered[t][0] = filtered[0];
        expect_filtered[t][1] = filtered[1];
    }
    for (int t = 0; t < 3; ++t) {
        CHECK(filter.filtered(t, 0) == doctest::Approx(expect_filtered[t][0]).epsilon(1e-12));
        CHECK(filter.filtered(t, 1) == doctest::Approx(expect_filtered[t][1]).epsilon(1e-12));
    }
    CHECK(filter.loglik == doctest::Approx(loglik).epsilon(1e-12));

    // backward pass by hand
    double smooth[3][2];
    smooth[2][0] = expect_filtered[2][0];
    smooth[2][1] = expect_filtered[2][1];
    for (int t = 1; t >= 0; --t) {
        for (int i = 0; i < 2; ++i) {
            double total = 0.0;
            for (int j = 0; j < 2; ++j) {
                total += P[i][j] * smooth[t + 1][j] / predicted[t + 1][j];
            }
            smooth[t][i] = expect_filtered[t][i] * total;
        }
        double norm = smooth[t][0] + smooth[t][1];
        smooth[t][0] /= norm;
        smooth[t][1] /= norm;
    }
    Eigen::MatrixXd smoothed = kim_smoother(filter, p);
    for (int t = 0; t < 3; ++t) {
        CHECK(smoothed(t, 0) == doctest::Approx(smooth[t][0]).epsilon(1e-12));
        CHECK(smoothed(t, 1) == doctest::Approx(smooth[t][1]).epsilon(1e-12));
    }
}

TEST_CASE("filter: absorbing chain keeps mass on the initial regime") {
    MsrParams p = two_regime_params(0.0, 2.0, 1.0, 1.0, 0.9999999999, 0.9999999999);
    // force an effectively absorbing chain and a known initial regime
    p.psi[0](0, 0) = 40.0;   // p11 ~ 1
    p.psi[1](0, 0) = -40.0;  // p22 ~ 1
    Philox4x32 rng(6, 0);
    const int T = 50;
    Eigen::VectorXd y(T);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(T, 1);
    for (int t = 0; t < T; ++t) y(t) = rng.normal();

    Eigen::VectorXd initial(2);
    initial << 1.0, 0.0;
    HamiltonFilterResult filter = hamilton_filter(y, X, Eigen::MatrixXd(), p, nullptr, &initial);
    for (int t = 0; t < T; ++t) {
        CHECK(filter.filtered(t, 0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("filter: degenerate density raises") {
    MsrParams p = two_regime_params(0.0, 0.0, 1.0, 1.0, 0.9, 0.9);
    Eigen::VectorXd y(3);
    y << 0.0, 1e200, 0.0;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
    try {
        hamilton_filter(y, X, Eigen::MatrixXd(), p);
        FAIL("expected DegenerateDensity");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateDensity);
    }
}

TEST_CASE("probability rows sum to one on fits") {
    Eigen::VectorXd sigma(2);
    sigma << 2.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    MsrSimulation sim = simulate_msr(acceptance_beta(), sigma, P, 600, 11);
    MsrSpec spec;
    MsrFitOptions options;
    options.n_starts = 4;
    MsrFit fit = fit_msr(spec, sim.y, sim.X, Eigen::MatrixXd(), nullptr, options);
    for (Eigen::Index t = 0; t < fit.filtered.rows(); ++t) {
        CHECK(fit.filtered.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(fit.smoothed.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    // multistart improvement property
    for (double start_ll : fit.start_logliks) {
        CHECK(fit.loglik >= start_ll - 1e-9);
    }
    // relabeling puts the high-volatility regime first
    CHECK(fit.params.sigma(0) >= fit.params.sigma(1));
}

TEST_CASE("fit recovers a well-separated two-regime simulation") {
    Eigen::VectorXd sigma(2);
    sigma << 2.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    MsrSimulation sim = simulate_msr(acceptance_beta(), sigma, P, 1500, 21);
    MsrSpec spec;
    MsrFit fit = fit_msr(spec, sim.y, sim.X);
    REQUIRE(fit.converged);

    // report layout: regime1 (b0,b1), regime2 (b0,b1), sigma1, sigma2, p11, p22
    std::vector<double> truth = {1.0, 0.5, -1.0, 0.2, 2.0, 0.5, 0.95, 0.90};
    REQUIRE(fit.estimates.size() == truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double se = fit.std_errors[i];
        REQUIRE(std::isfinite(se));
        CHECK(std::abs(fit.estimates[i] - truth[i]) < 4.0 * se + 1e-9);
    }
    CHECK(fit.durations[0] == doctest::Approx(1.0 / (1.0 - fit.estimates[6])).epsilon(1e-9));
}

TEST_CASE("smoothed probabilities track the true path when regimes are far apart") {
    // sigma ratio 10 with persistent, well-separated regimes; at shorter
    // durations the switch boundaries alone exceed the 5% ambiguity budget
    Eigen::VectorXd b1(2), b2(2);
    b1 << 2.0, 0.5;
    b2 << -2.0, 0.2;
    Eigen::VectorXd sigma(2);
    sigma << 5.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.98, 0.02, 0.04, 0.96;
    MsrSimulation sim = simulate_msr({b1, b2}, sigma, P, 2000, 33);

    MsrParams truth;
    truth.beta = {b1, b2};
    truth.phi = Eigen::VectorXd(0);
    truth.sigma = sigma;
    truth.psi = two_regime_params(0, 0, 1, 1, 0.98, 0.96).psi;
    MsrSpec spec;
    MsrFit eval = evaluate_msr(spec, truth, sim.y, sim.X);

    int close = 0;
    for (int t = 0; t < 2000; ++t) {
        double prob_true = eval.smoothed(t, sim.regimes[static_cast<std::size_t>(t)]);
        if (prob_true > 0.95) ++close;
    }
    CHECK(close >= 1900);  // within 0.05 of the true path on >= 95% of dates
}

TEST_CASE("insufficient data is rejected") {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(20);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 4);
    MsrSpec spec;  // 8 beta + 2 sigma + 2 logits = 12 parameters
    try {
        fit_msr(spec, y, X);
        FAIL("expected InsufficientData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientData);
    }
}

TEST_CASE("identical-regime data: likelihood dominates the pooled fit") {
    Philox4x32 rng(44, 0);
    const int T = 600;
    Eigen::VectorXd y(T);
    Eigen::MatrixXd X(T, 2);
    for (int t = 0; t < T; ++t) {
        X(t, 0) = 1.0;
        X(t, 1) = rng.normal();
        y(t) = 0.5 + 0.8 * X(t, 1) + rng.normal();
    }
    OlsFit pooled = ols(X, y);
    double sigma2_ml = pooled.ssr / T;
    double ols_loglik = -0.5 * T * (std::log(2.0 * std::acos(-1.0)) + std::log(sigma2_ml) + 1.0);

    MsrSpec spec;
    MsrFitOptions options;
    options.n_starts = 4;
    MsrFit fit = fit_msr(spec, y, X, Eigen::MatrixXd(), nullptr, options);
    // nesting: the switching model can never do worse than pooled OLS
    CHECK(fit.loglik >= ols_loglik - 1e-6);
}

TEST_CASE("label permutation of the starts leaves the relabeled fit unchanged") {
    Eigen::VectorXd sigma(2);
    sigma << 2.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    MsrSimulation sim = simulate_msr(acceptance_beta(), sigma, P, 800, 55);
    MsrSpec spec;
    MsrFitOptions options;
    options.n_starts = 3;
    MsrFit base = fit_msr(spec, sim.y, sim.X, Eigen::MatrixXd(), nullptr, options);
    options.permute_start_labels = true;
    MsrFit permuted = fit_msr(spec, sim.y, sim.X, Eigen::MatrixXd(), nullptr, options);

    REQUIRE(base.estimates.size() == permuted.estimates.size());
    for (std::size_t i = 0; i < base.estimates.size(); ++i) {
        CHECK(permuted.estimates[i] == doctest::Approx(base.estimates[i]).epsilon(1e-6));
    }
    CHECK(permuted.loglik == doctest::Approx(base.loglik).epsilon(1e-9));
}

TEST_CASE("adding a constant to y shifts the intercepts and keeps the likelihood") {
    Eigen::VectorXd sigma(2);
    sigma << 2.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    MsrSimulation sim = simulate_msr(acceptance_beta(), sigma, P, 800, 66);
    MsrSpec spec;
    MsrFitOptions options;
    options.n_starts = 4;
    MsrFit base = fit_msr(spec, sim.y, sim.X, Eigen::MatrixXd(), nullptr, options);

    const double c = 3.0;
    Eigen::VectorXd shifted = sim.y.array() + c;
    MsrFit moved = fit_msr(spec, shifted, sim.X, Eigen::MatrixXd(), nullptr, options);

    CHECK(moved.loglik == doctest::Approx(base.loglik).epsilon(1e-4));
    // intercepts live at report positions 0 and 2
    CHECK(moved.estimates[0] - base.estimates[0] == doctest::Approx(c).epsilon(1e-3));
    CHECK(moved.estimates[2] - base.estimates[2] == doctest::Approx(c).epsilon(1e-3));
}

TEST_CASE("time-varying transition drivers feed the filter") {
    MsrParams p = two_regime_params(0.0, 2.0, 1.0, 0.5, 0.9, 0.8);
    // add a slope on a second driver column for row 1
    p.psi[0] = Eigen::MatrixXd(1, 2);
    p.psi[0] << std::log(9.0), 1.5;
    p.psi[1] = Eigen::MatrixXd(1, 2);
    p.psi[1] << std::log(0.25), -0.5;

    Philox4x32 rng(14, 0);
    const int T = 300;
    Eigen::VectorXd y(T);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(T, 1);
    Eigen::MatrixXd E(T, 2);
    for (int t = 0; t < T; ++t) {
        y(t) = rng.normal();
        E(t, 0) = 1.0;
        E(t, 1) = std::sin(t / 25.0);
    }
    HamiltonFilterResult filter = hamilton_filter(y, X, Eigen::MatrixXd(), p, &E);
    CHECK(std::isfinite(filter.loglik));
    for (int t = 0; t < T; ++t) {
        CHECK(filter.filtered.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    // the matrix driving the transition into t comes from E at t-1
    Eigen::MatrixXd P_at_5 = transition_logit(E.row(4).transpose(), p.psi);
    Eigen::VectorXd xi4 = filter.filtered.row(4).transpose();
    Eigen::VectorXd predicted5 = P_at_5.transpose() * xi4;
    CHECK(filter.predicted(5, 0) == doctest::Approx(predicted5(0)).epsilon(1e-12));
    Eigen::MatrixXd smoothed = kim_smoother(filter, p, &E);
    for (int t = 0; t < T; ++t) {
        CHECK(smoothed.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("non-switching regressors are estimated through phi") {
    Eigen::VectorXd sigma(2);
    sigma << 2.0, 0.5;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    MsrSimulation sim = simulate_msr(acceptance_beta(), sigma, P, 1200, 77);
    Philox4x32 rng(78, 0);
    Eigen::MatrixXd Z(1200, 1);
    for (int t = 0; t < 1200; ++t) {
        Z(t, 0) = rng.normal();
        sim.y(t) += 1.5 * Z(t, 0);  // common effect across regimes
    }
    MsrSpec spec;
    MsrFitOptions options;
    options.n_starts = 4;
    MsrFit fit = fit_msr(spec, sim.y, sim.X, Z, nullptr, options);
    // phi sits right after the switching blocks in the report layout
    double phi_hat = fit.estimates[4];
    double phi_se = fit.std_errors[4];
    REQUIRE(std::isfinite(phi_se));
    CHECK(std::abs(phi_hat - 1.5) < 4.0 * phi_se + 1e-9);
    CHECK(fit.param_names[4] == "z0");
}

TEST_CASE("common variance option ties the regime scales together") {
    Eigen::VectorXd sigma(2);
    sigma << 1.0, 1.0;
    Eigen::MatrixXd P(2, 2);
    P << 0.95, 0.05, 0.10, 0.90;
    Eigen::VectorXd b1(2), b2(2);
    b1 << 2.0, 0.5;
    b2 << -2.0, 0.2;
    MsrSimulation sim = simulate_msr({b1, b2}, sigma, P, 1000, 88);
    MsrSpec spec;
    spec.switching_variance = false;
    MsrFitOptions options;
    options.n_starts = 4;
    MsrFit fit = fit_msr(spec, sim.y, sim.X, Eigen::MatrixXd(), nullptr, options);
    CHECK(fit.params.sigma(0) == fit.params.sigma(1));
    // report layout: 4 betas, then the two (tied) sigmas
    CHECK(std::abs(fit.estimates[0] - 2.0) < 0.5);
    CHECK(std::abs(fit.estimates[2] + 2.0) < 0.5);
}

TEST_CASE("smoothed_probabilities guards against empty fits") {
    MsrFit empty;
    try {
        smoothed_probabilities(empty);
        FAIL("expected NotFitted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotFitted);
    }
}
