#include "asep/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "asep/error.hpp"

namespace asep::stats {

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    double t = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1 : -1) * t;
    if (t < 1e-17) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

double ks_pvalue(double D, double n_eff) {
  double sn = std::sqrt(n_eff);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * D);
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw Error(ErrorCode::InvalidSpec, "ks on empty sample");
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double D = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = cdf(x[i]);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  return {D, ks_pvalue(D, n), x.size()};
}

KsResult ks_uniform(const std::vector<double>& x, double a, double b) {
  return ks_one_sample(x, [a, b](double v) { return std::clamp((v - a) / (b - a), 0.0, 1.0); });
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidSpec, "ks on empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double D = 0, na = double(a.size()), nb = double(b.size());
  // step through distinct values so that ties are handled
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  return {D, ks_pvalue(D, na * nb / (na + nb)), a.size() + b.size()};
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw Error(ErrorCode::InvalidSpec, "quantile of empty sample");
  std::sort(x.begin(), x.end());
  double h = (double(x.size()) - 1) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - double(lo)) * (x[hi] - x[lo]);
}

double median(const std::vector<double>& x) { return quantile(x, 0.5); }

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0;
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

MeanCi mean_ci(const std::vector<double>& x, double level) {
  double m = mean(x), ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  double n = double(x.size());
  double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0;
  double z = normal_quantile(0.5 + level / 2);
  return {m, z * sd / std::sqrt(std::max(n, 1.0)), x.size(), level};
}

Proportion wilson(std::size_t k, std::size_t n, double level) {
  if (n == 0) return {0, 0, 0, 0, 1, level};
  double z = normal_quantile(0.5 + level / 2), nn = double(n), p = double(k) / nn;
  double den = 1 + z * z / nn;
  double c = (p + z * z / (2 * nn)) / den;
  double h = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
  return {k, n, p, std::max(0.0, c - h), std::min(1.0, c + h), level};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidSpec, "fit needs >= 2 points");
  double n = double(x.size()), mx = mean(x), my = mean(y), sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = std::max(0.0, syy - f.slope * sxy);
  f.slope_se = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0;
  f.r2 = syy > 0 ? 1 - rss / syy : 1;
  return f;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::InvalidSpec, "tv of unequal supports");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace asep::stats
