#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace asep::stats {

struct KsResult {
  double D;
  double p;  // asymptotic Kolmogorov p-value, small-sample corrected
  std::size_t n;
};

// Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_q(double lambda);
double ks_pvalue(double D, double n_eff);

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_uniform(const std::vector<double>& x, double a, double b);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// linear interpolation between order statistics (type 7)
double quantile(std::vector<double> x, double p);
double median(const std::vector<double>& x);
double mean(const std::vector<double>& x);

struct MeanCi {
  double mean;
  double halfwidth;
  std::size_t n;
  double level;
};
// normal approximation
MeanCi mean_ci(const std::vector<double>& x, double level);

struct Proportion {
  std::size_t k, n;
  double p, lo, hi;  // Wilson score interval
  double level;
};
Proportion wilson(std::size_t k, std::size_t n, double level);

struct LinearFit {
  double slope, intercept, slope_se, r2;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// fit of log y against log x
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

double normal_quantile(double p);

// total variation between two probability vectors of equal length
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

std::string fmt(double v);

}  // namespace asep::stats
