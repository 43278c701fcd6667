#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace asep::dpp {

inline constexpr int kMaxKernelSize = 60;

// prod_{j>=0} (1 - a q^j), stopped once |a q^j| < tol (1-q)
double q_pochhammer_inf(double a, double q, double tol = 1e-16);
// q^A with 0^0 = 1 and 0^negative = +inf
double qpow(double q, double A);

// generalized Laguerre polynomial L_n^{(alpha)}(t), alpha = beta - 1, standard normalization
double laguerre_poly(int n, double beta, double t);

enum class LaguerreSign { Standard, PositiveLeading };

struct KernelMatrix {
  int N = 0;
  double r = 0, beta = 1;
  Eigen::MatrixXd K;
  int laguerre_nodes = 0;  // nodes of the [0, inf) rule
  int jacobi_nodes = 0;    // nodes of the [0, r] rule
  LaguerreSign sign = LaguerreSign::Standard;
};

// K(x,y) = sqrt(x! y! / G(x+beta) G(y+beta)) int_r^inf L_x L_y t^{beta-1} e^{-t} dt on {0..N-1}
KernelMatrix dlaguerre_kernel(double r, double beta, int N,
                              LaguerreSign sign = LaguerreSign::Standard);

// det(I + sign K)
double fredholm_det(const Eigen::MatrixXd& K, int sign);

// P[no point in {0..m-1}] = det(I - K) on {0..m-1}; needs m <= N
double gap_probability(const KernelMatrix& K, int m);

struct QFunctional {
  double zeta;
  double q;
  double f(int z) const;  // zeta q^z / (1 + zeta q^z)
};

// E[prod over points of (1 - f(z))] = det(I - f^{1/2} K f^{1/2})
double multiplicative_expectation(const KernelMatrix& K, const QFunctional& g);
// same with an explicit f on {0..N-1}; f must vanish beyond N
double multiplicative_expectation(const KernelMatrix& K, const std::vector<double>& f);

struct QLaplaceReport {
  // each inequality as (left side, right side), holding when left <= right
  std::pair<double, double> za1, za2, za3;
  bool ok1, ok2, ok3;
  bool pass() const { return ok1 && ok2 && ok3; }
};

// inequalities evaluated on a weighted empirical law of A
QLaplaceReport q_laplace_bounds(const std::vector<std::pair<double, double>>& law, double q,
                                double b);
QLaplaceReport q_laplace_bounds(const std::vector<double>& samples, double q, double b);

std::string kernel_csv(const KernelMatrix& K);

}  // namespace asep::dpp
