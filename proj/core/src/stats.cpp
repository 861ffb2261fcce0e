#include "psslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psslab {

namespace {

double log_gamma(double x) { return std::lgamma(x); }

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double t_cdf(double t, int df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - p : p;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_quantile(double p, int df) {
  if (df < 1) throw std::invalid_argument("student_t_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("student_t_quantile: p in (0,1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, df);

  double lo = 0.0, hi = 1.0;
  while (t_cdf(hi, df) < p) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  const size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

MeanCi mean_ci(std::span<const double> values, double confidence) {
  MeanCi out;
  out.n = static_cast<int>(values.size());
  out.mean = mean_of(values);
  if (out.n < 2) return out;
  const double t = student_t_quantile(0.5 + 0.5 * confidence, out.n - 1);
  out.half_width = t * sample_sd(values) / std::sqrt(static_cast<double>(out.n));
  return out;
}

double ks_distance_exponential(std::vector<double> samples, double mean) {
  if (samples.empty()) return 1.0;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = 1.0 - std::exp(-samples[i] / mean);
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

double ks_distance_exponential_weighted(std::vector<std::pair<double, double>> samples,
                                        double mean) {
  if (samples.empty()) return 1.0;
  std::sort(samples.begin(), samples.end());
  double total = 0.0;
  for (const auto& [v, w] : samples) total += w;
  double cum = 0.0;
  double d = 0.0;
  for (const auto& [v, w] : samples) {
    const double f = 1.0 - std::exp(-v / mean);
    d = std::max(d, std::fabs(cum / total - f));
    cum += w;
    d = std::max(d, std::fabs(cum / total - f));
  }
  return d;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  const size_t n = x.size();
  if (n < 2 || y.size() != n) return fit;
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double loglog_exponent(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

}  // namespace psslab
