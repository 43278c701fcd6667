#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "asep/dpp.hpp"
#include "asep/error.hpp"
#include "doctest.h"

using namespace asep;
using namespace asep::dpp;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

// explicit series sum_i (-1)^i binom(n+alpha, n-i) t^i / i!
double laguerre_series(int n, double alpha, double t) {
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    double binom = std::exp(std::lgamma(n + alpha + 1) - std::lgamma(n - i + 1) - std::lgamma(alpha + i + 1));
    s += (i % 2 ? -1 : 1) * binom * std::pow(t, i) / std::tgamma(i + 1);
  }
  return s;
}

// normalized integral of L_x L_y over [r, inf), substitution t = r + u^2 removes the t^{beta-1} edge
double kernel_entry_quadrature(double r, double beta, int x, int y) {
  boost::math::quadrature::exp_sinh<double> es;
  auto f = [&](double u) {
    double t = r + u * u;
    if (t > 2000 || u <= 0) return 0.0;
    // 2u t^{beta-1} e^{-t} in logs; at r = 0 this is 2 u^{2 beta - 1} e^{-u^2}
    double lw = r > 0 ? std::log(u) + (beta - 1) * std::log(t) - t : (2 * beta - 1) * std::log(u) - t;
    return 2 * std::exp(lw) * laguerre_poly(x, beta, t) * laguerre_poly(y, beta, t);
  };
  double I = es.integrate(f, 1e-13);
  double pre = 0.5 * (std::lgamma(x + 1) + std::lgamma(y + 1) - std::lgamma(x + beta) - std::lgamma(y + beta));
  return std::exp(pre) * I;
}

double minor_series(const Eigen::MatrixXd& K) {
  const int n = static_cast<int>(K.rows());
  double s = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    Eigen::MatrixXd M(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) M(a, b) = K(idx[a], idx[b]);
    s += idx.empty() ? 1.0 : M.determinant();
  }
  return s;
}

}  // namespace

TEST_SUITE("dpp") {

TEST_CASE("q-Pochhammer") {
  CHECK(q_pochhammer_inf(0, 0.7) == 1.0);
  CHECK(q_pochhammer_inf(0.3, 0) == doctest::Approx(0.7).epsilon(1e-16));
  double brute = 1;
  for (int j = 0; j < 200; ++j) brute *= 1 - 0.5 * std::pow(0.5, j);
  CHECK(std::abs(q_pochhammer_inf(0.5, 0.5) - brute) <= 1e-12);
  for (double a : {-3.0, -0.9, 0.2, 0.99})
    for (double q : {0.1, 0.5, 0.9, 0.99}) {
      double b = 1;
      for (int j = 0; j < 20000; ++j) b *= 1 - a * std::pow(q, j);
      CHECK(std::abs(q_pochhammer_inf(a, q) - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
  CHECK(code_of([] { q_pochhammer_inf(0.5, 1.0); }) == ErrorCode::DivergentParameter);
  CHECK(qpow(0, 0) == 1.0);
  CHECK(std::isinf(qpow(0, -1)));
  CHECK(qpow(0.5, 3) == 0.125);
}

TEST_CASE("Laguerre polynomials") {
  CHECK(laguerre_poly(0, 2.5, 7.0) == 1.0);
  for (double beta : {0.5, 1.0, 3.0})
    for (double t : {0.0, 0.3, 2.0, 11.0}) {
      CHECK(laguerre_poly(1, beta, t) == doctest::Approx(beta - t).epsilon(1e-14));
      for (int n = 2; n <= 12; ++n)
        CHECK(laguerre_poly(n, beta, t) == doctest::Approx(laguerre_series(n, beta - 1, t)).epsilon(1e-9));
    }
}

TEST_CASE("Laguerre orthogonality") {
  for (double beta : {0.5, 1.0, 3.0})
    for (int m = 0; m <= 15; ++m)
      for (int n = m; n <= 15; n += 3) {
        double v = kernel_entry_quadrature(0, beta, m, n);
        CHECK(std::abs(v - (m == n ? 1.0 : 0.0)) <= 1e-8);
      }
}

TEST_CASE("kernel at r = 0 is the identity") {
  for (double beta : {0.5, 1.0, 2.0, 5.0}) {
    auto K = dlaguerre_kernel(0, beta, 60);
    CHECK((K.K - Eigen::MatrixXd::Identity(60, 60)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("kernel vanishes for large r") {
  for (double beta : {0.5, 1.0, 2.0, 5.0}) {
    auto K = dlaguerre_kernel(50 * beta + 200, beta, 40);
    CHECK(K.K.cwiseAbs().maxCoeff() <= 1e-6);
  }
  // degree 59 still carries weight out to t ~ 4N, so at N = 60 the corner is not small for beta <= 1;
  // there the entries must simply agree with the integral
  for (double beta : {0.5, 1.0}) {
    double r = 50 * beta + 200;
    auto K = dlaguerre_kernel(r, beta, 60);
    CHECK(K.K(59, 59) == doctest::Approx(kernel_entry_quadrature(r, beta, 59, 59)).epsilon(1e-8));
    CHECK(K.K(58, 59) == doctest::Approx(kernel_entry_quadrature(r, beta, 58, 59)).epsilon(1e-8));
  }
}

TEST_CASE("kernel entries against direct quadrature") {
  for (auto [r, beta] : {std::pair{2.0, 0.5}, std::pair{5.0, 1.0}, std::pair{13.3, 3.0}, std::pair{20.0, 4.0}}) {
    auto K = dlaguerre_kernel(r, beta, 12);
    for (int x : {0, 3, 7})
      for (int y : {0, 5, 11}) CHECK(std::abs(K.K(x, y) - kernel_entry_quadrature(r, beta, x, y)) <= 1e-9);
  }
  // a single point process at beta = 1: K(0,0) = P-mass e^{-r}
  CHECK(dlaguerre_kernel(5, 1, 4).K(0, 0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-10));
}

TEST_CASE("kernel symmetry, spectrum and sign convention") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 25; ++k) {
    double r = 60 * U(rng), beta = 0.2 + 6 * U(rng);
    int N = 10 + static_cast<int>(50 * U(rng));
    auto K = dlaguerre_kernel(r, beta, N);
    CHECK((K.K - K.K.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.K);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    CHECK(es.eigenvalues().maxCoeff() <= 1 + 1e-8);
    auto P = dlaguerre_kernel(r, beta, N, LaguerreSign::PositiveLeading);
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y) CHECK(std::abs(P.K(x, y) - ((x + y) % 2 ? -1 : 1) * K.K(x, y)) <= 1e-14);
    CHECK(fredholm_det(P.K, -1) == doctest::Approx(fredholm_det(K.K, -1)).epsilon(1e-9));
    int m = N / 2;
    CHECK(gap_probability(P, m) == doctest::Approx(gap_probability(K, m)).epsilon(1e-9));
  }
  CHECK(code_of([] { dlaguerre_kernel(1, 1, 61); }) == ErrorCode::TruncationTooLarge);
  CHECK(code_of([] { dlaguerre_kernel(-1, 1, 5); }) == ErrorCode::ParameterOutOfRange);
  CHECK(code_of([] { dlaguerre_kernel(1, 0, 5); }) == ErrorCode::ParameterOutOfRange);
}

TEST_CASE("Fredholm determinant") {
  CHECK(fredholm_det(Eigen::MatrixXd::Zero(5, 5), 1) == 1.0);
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, -1, 2), v = Eigen::VectorXd::LinSpaced(6, 0.5, -0.3);
  CHECK(fredholm_det(u * v.transpose(), 1) == doctest::Approx(1 + v.dot(u)).epsilon(1e-13));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 0.4);
  for (int n = 1; n <= 8; ++n)
    for (int k = 0; k < 5; ++k) {
      Eigen::MatrixXd K(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K(i, j) = nd(rng);
      CHECK(std::abs(fredholm_det(K, 1) - minor_series(K)) <= 1e-10);
      CHECK(std::abs(fredholm_det(K, -1) - minor_series(-K)) <= 1e-10);
    }
}

TEST_CASE("gap probabilities") {
  auto K = dlaguerre_kernel(8, 2, 40);
  CHECK(gap_probability(K, 0) == 1.0);
  double prev = 1;
  for (int m = 1; m <= 40; ++m) {
    double g = gap_probability(K, m);
    CHECK(g <= prev + 1e-12);
    CHECK(g >= -1e-12);
    prev = g;
  }
  auto I = dlaguerre_kernel(0, 2, 20);
  for (int m = 1; m <= 20; ++m) CHECK(std::abs(gap_probability(I, m)) <= 1e-8);
  CHECK(code_of([&] { gap_probability(K, 41); }) == ErrorCode::TruncationUnsound);
}

TEST_CASE("multiplicative functionals") {
  auto K = dlaguerre_kernel(6, 3, 60);
  CHECK(multiplicative_expectation(K, QFunctional{0, 0.5}) == 1.0);
  auto far = dlaguerre_kernel(600, 3, 30);
  CHECK(multiplicative_expectation(far, QFunctional{1, 0.3}) == doctest::Approx(1).epsilon(1e-8));

  for (double zeta : {0.1, 1.0, 10.0})
    for (double q : {0.2, 1.0 / 3, 0.5}) {
      auto I = dlaguerre_kernel(0, 2, 60);
      double direct = 1 / q_pochhammer_inf(-zeta, q);
      CHECK(std::abs(multiplicative_expectation(I, QFunctional{zeta, q}) - direct) <= 1e-8);
    }

  // indicator functional gives the gap probability
  for (int m : {1, 4, 9, 20}) {
    std::vector<double> f(60, 0.0);
    for (int z = 0; z < m; ++z) f[static_cast<std::size_t>(z)] = 1;
    CHECK(std::abs(multiplicative_expectation(K, f) - gap_probability(K, m)) <= 1e-10);
  }

  QFunctional g{2, 0.5};
  for (int z = 0; z < 30; ++z) {
    CHECK(g.f(z) > 0);
    CHECK(g.f(z) < 1);
    if (z) CHECK(g.f(z) < g.f(z - 1));
  }
  // q^N f too large for the truncation
  CHECK(code_of([&] { multiplicative_expectation(dlaguerre_kernel(6, 3, 10), QFunctional{10, 0.9}); }) ==
        ErrorCode::TruncationUnsound);
}

TEST_CASE("q-Laplace inequalities, examples") {
  double q = 0.5;
  auto a = q_laplace_bounds(std::vector<double>(50, 10.0), q, 0);
  CHECK(a.za2.first == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(a.za2.second == doctest::Approx(1 / q_pochhammer_inf(-std::pow(q, 10), q)).epsilon(1e-14));
  CHECK(a.ok2);
  auto z = q_laplace_bounds(std::vector<double>(10, 0.0), q, 0);
  CHECK(z.za1.first == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z.za1.second == doctest::Approx(2 * (1 - 1 / q_pochhammer_inf(-1, q))));
  CHECK(z.ok1);
  auto m = q_laplace_bounds(std::vector<std::pair<double, double>>{{-3, 0.2}, {0, 0.3}, {4, 0.5}}, 0.7, 0);
  CHECK(m.za3.second == doctest::Approx(1.0));
  CHECK(m.pass());
}

TEST_CASE("kernel csv") {
  auto csv = kernel_csv(dlaguerre_kernel(1, 1, 3));
  CHECK(csv.rfind("x,y,K\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

}  // TEST_SUITE
