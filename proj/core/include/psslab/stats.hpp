#pragma once

#include <span>
#include <utility>
#include <vector>

namespace psslab {

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t half width
  int n = 0;
};

double mean_of(std::span<const double> values);
double sample_sd(std::span<const double> values);

// Two-sided Student-t confidence interval over independent replication means.
MeanCi mean_ci(std::span<const double> values, double confidence = 0.95);

// Quantile of the t distribution with `df` degrees of freedom.
double student_t_quantile(double p, int df);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// One-sample Kolmogorov-Smirnov distance against Exp(mean).
double ks_distance_exponential(std::vector<double> samples, double mean);

// Same, with per-sample weights defining the empirical CDF.
double ks_distance_exponential_weighted(std::vector<std::pair<double, double>> samples,
                                        double mean);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Slope of log(y) against log(x); the scaling exponent of y ~ x^p.
double loglog_exponent(std::span<const double> x, std::span<const double> y);

}  // namespace psslab
