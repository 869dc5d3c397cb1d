#include "regimevol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "regimevol/error.hpp"

namespace regimevol {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double std_dev(std::span<const double> x) { return std::sqrt(variance(x)); }

Descriptives describe(std::span<const double> x) {
    Descriptives d;
    d.n = x.size();
    if (x.empty()) return d;
    d.mean = mean(x);
    d.min = *std::min_element(x.begin(), x.end());
    d.max = *std::max_element(x.begin(), x.end());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        double c = v - d.mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    double n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    d.sd = std::sqrt(m2 * n / std::max(1.0, n - 1.0));
    if (m2 > 0.0) {
        d.skewness = m3 / std::pow(m2, 1.5);
        d.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return d;
}

double quantile(std::span<const double> x, double tau) {
    if (x.empty()) fail(ErrorCode::EmptySeries, "quantile of empty sample");
    if (!(tau > 0.0 && tau < 1.0)) fail(ErrorCode::InvalidTau, "tau must lie in (0,1)");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double pos = tau * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    static const boost::math::normal_distribution<double> dist;
    return boost::math::cdf(dist, x);
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> dist;
    return boost::math::quantile(dist, p);
}

double chi_squared_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

}  // namespace regimevol
