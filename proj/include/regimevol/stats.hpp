#pragma once

#include <cstddef>
#include <span>

namespace regimevol {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // sample variance, n-1 denominator
double std_dev(std::span<const double> x);

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;  // excess
    double min = 0.0;
    double max = 0.0;
};

Descriptives describe(std::span<const double> x);

/// Empirical tau-quantile with linear interpolation between order statistics.
double quantile(std::span<const double> x, double tau);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);          // inverse standard normal CDF
double chi_squared_sf(double x, int df);   // upper tail probability

}  // namespace regimevol
