#pragma once

#include <span>
#include <vector>

namespace fbmdrift::stats {

double mean(std::span<const double> xs);
//! Unbiased sample variance.
double variance(std::span<const double> xs);
double standard_error(std::span<const double> xs);
//! Linear-interpolation quantile (type 7).
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);
double iqr(std::span<const double> xs);

//! Ordinary least-squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

double lag1_autocorrelation(std::span<const double> xs);

struct NormalityTest {
  double statistic = 0.0;  // A^2 adjusted for estimated mean and variance
  double p_value = 1.0;
};

//! Anderson-Darling normality test with estimated mean and variance.
NormalityTest anderson_darling(std::span<const double> xs);

}  // namespace fbmdrift::stats
