#include "asep/dpp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "asep/error.hpp"

namespace asep::dpp {

namespace {

void check_q(double q) {
  if (!(q < 1)) throw Error(ErrorCode::DivergentParameter, "q must be < 1");
  if (!(q >= 0)) throw Error(ErrorCode::ParameterOutOfRange, "q must be >= 0");
}

// nodes of the n-point Gauss rule for the Jacobi matrix (diag, sub); weights = mu0 * v0^2
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double mu0,
                  Eigen::VectorXd& nodes, Eigen::VectorXd* weights) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, weights ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  nodes = es.eigenvalues();
  if (weights) *weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
}

// orthonormal Laguerre values times a common positive factor, for k < n at t;
// the factor cancels in the Christoffel form
void scaled_orthonormal(double t, double alpha, int n, std::vector<double>& P) {
  P.assign(static_cast<std::size_t>(n), 0.0);
  P[0] = 1.0;
  if (n > 1) P[1] = (1 + alpha - t) / std::sqrt(1 + alpha);
  for (int k = 1; k + 1 < n; ++k) {
    double a = std::sqrt((k + 1) * (k + 1 + alpha)), b = std::sqrt(k * (k + alpha));
    P[static_cast<std::size_t>(k + 1)] =
        ((2 * k + 1 + alpha - t) * P[static_cast<std::size_t>(k)] - b * P[static_cast<std::size_t>(k - 1)]) / a;
    if (std::abs(P[static_cast<std::size_t>(k + 1)]) > 1e150)
      for (int j = 0; j <= k + 1; ++j) P[static_cast<std::size_t>(j)] *= 1e-150;
  }
}

}  // namespace

double qpow(double q, double A) {
  if (q == 0) return A > 0 ? 0.0 : (A == 0 ? 1.0 : std::numeric_limits<double>::infinity());
  return std::pow(q, A);
}

double q_pochhammer_inf(double a, double q, double tol) {
  check_q(q);
  double prod = 1.0, term = a;
  for (int j = 0; j < 100000; ++j) {
    if (std::abs(term) < tol * (1 - q) || term == 0) break;
    prod *= 1 - term;
    term *= q;
  }
  return prod;
}

double laguerre_poly(int n, double beta, double t) {
  double alpha = beta - 1;
  if (n == 0) return 1.0;
  double l0 = 1.0, l1 = 1 + alpha - t;
  for (int k = 1; k < n; ++k) {
    double l2 = ((2 * k + 1 + alpha - t) * l1 - (k + alpha) * l0) / (k + 1);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

KernelMatrix dlaguerre_kernel(double r, double beta, int N, LaguerreSign sign) {
  if (N > kMaxKernelSize)
    throw Error(ErrorCode::TruncationTooLarge, "kernel size " + std::to_string(N) + " > 60");
  if (N < 1 || !(r >= 0) || !(beta > 0))
    throw Error(ErrorCode::ParameterOutOfRange, "need N >= 1, r >= 0, beta > 0");
  const double alpha = beta - 1;
  KernelMatrix km;
  km.N = N;
  km.r = r;
  km.beta = beta;
  km.sign = sign;
  km.K = Eigen::MatrixXd::Zero(N, N);

  // [0, inf): Gauss-Laguerre in Christoffel form, lambda_i p_x p_y = P_x P_y / sum_k P_k^2
  const int nl = 4 * (N - 1) + 40;
  km.laguerre_nodes = nl;
  {
    Eigen::VectorXd d(nl), s(nl - 1), nodes;
    for (int k = 0; k < nl; ++k) d(k) = 2 * k + alpha + 1;
    for (int k = 1; k < nl; ++k) s(k - 1) = std::sqrt(k * (k + alpha));
    golub_welsch(d, s, 0, nodes, nullptr);
    std::vector<double> P;
    for (int i = 0; i < nl; ++i) {
      scaled_orthonormal(nodes(i), alpha, nl, P);
      double sum = 0;
      for (double v : P) sum += v * v;
      for (int x = 0; x < N; ++x)
        for (int y = 0; y <= x; ++y)
          km.K(x, y) += P[static_cast<std::size_t>(x)] * P[static_cast<std::size_t>(y)] / sum;
    }
  }

  // [0, r]: Gauss-Jacobi on [0,1] with weight s^alpha, integrand p_x p_y e^{-rs}
  if (r > 0) {
    const int nj = N + 40 + static_cast<int>(std::ceil(r));
    km.jacobi_nodes = nj;
    const double a = 0, b = alpha;
    Eigen::VectorXd d(nj), s(nj - 1), x, w;
    for (int n = 0; n < nj; ++n) {
      double ab = 2 * n + a + b;
      d(n) = n == 0 ? (b - a) / (a + b + 2) : (b * b - a * a) / (ab * (ab + 2));
    }
    for (int n = 1; n < nj; ++n) {
      double ab = 2 * n + a + b;
      s(n - 1) = std::sqrt(4.0 * n * (n + a) * (n + b) * (n + a + b) / (ab * ab * (ab + 1) * (ab - 1)));
    }
    golub_welsch(d, s, 1.0, x, &w);
    std::vector<double> Q(static_cast<std::size_t>(N));
    for (int i = 0; i < nj; ++i) {
      double t = r * (1 + x(i)) / 2;
      // v0^2 = W_i (alpha+1); the s^alpha weight integrates to 1/(alpha+1)
      double logf = std::log(w(i)) - std::log(beta) + beta * std::log(r) - t - std::lgamma(beta);
      // q_k = sqrt(Gamma(beta)) p_k
      Q[0] = 1.0;
      if (N > 1) Q[1] = (1 + alpha - t) / std::sqrt(1 + alpha);
      for (int k = 1; k + 1 < N; ++k)
        Q[static_cast<std::size_t>(k + 1)] =
            ((2 * k + 1 + alpha - t) * Q[static_cast<std::size_t>(k)] -
             std::sqrt(k * (k + alpha)) * Q[static_cast<std::size_t>(k - 1)]) /
            std::sqrt((k + 1) * (k + 1 + alpha));
      double f = std::exp(logf);
      for (int u = 0; u < N; ++u)
        for (int v = 0; v <= u; ++v)
          km.K(u, v) -= f * Q[static_cast<std::size_t>(u)] * Q[static_cast<std::size_t>(v)];
    }
  }
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < u; ++v) km.K(v, u) = km.K(u, v);
  if (sign == LaguerreSign::PositiveLeading)
    for (int u = 0; u < N; ++u)
      for (int v = 0; v < N; ++v)
        if ((u + v) % 2) km.K(u, v) = -km.K(u, v);
  return km;
}

double fredholm_det(const Eigen::MatrixXd& K, int sign) {
  if (K.rows() == 0) return 1.0;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(K.rows(), K.cols()) + double(sign) * K;
  return A.partialPivLu().determinant();
}

double gap_probability(const KernelMatrix& K, int m) {
  // beyond N the kernel is unknown, so only restrictions inside {0..N-1} are exact
  if (m > K.N) throw Error(ErrorCode::TruncationUnsound, "gap set exceeds the truncation");
  if (m <= 0) return 1.0;
  return fredholm_det(K.K.topLeftCorner(m, m), -1);
}

double QFunctional::f(int z) const {
  double v = zeta * qpow(q, z);
  return v / (1 + v);
}

double multiplicative_expectation(const KernelMatrix& K, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != K.N) throw Error(ErrorCode::InvalidSpec, "f size");
  Eigen::VectorXd s(K.N);
  for (int z = 0; z < K.N; ++z) s(z) = std::sqrt(f[static_cast<std::size_t>(z)]);
  Eigen::MatrixXd M = s.asDiagonal() * K.K * s.asDiagonal();
  return fredholm_det(M, -1);
}

double multiplicative_expectation(const KernelMatrix& K, const QFunctional& g) {
  check_q(g.q);
  if (g.zeta < 0) throw Error(ErrorCode::ParameterOutOfRange, "zeta must be >= 0");
  // points beyond N are not represented; their total weight is at most sum_{z>=N} f(z)
  double tail = g.zeta * qpow(g.q, K.N) / (1 - g.q);
  if (tail >= 1e-8)
    throw Error(ErrorCode::TruncationUnsound,
                "tail weight " + std::to_string(tail) + " beyond the truncation");
  std::vector<double> f(static_cast<std::size_t>(K.N));
  for (int z = 0; z < K.N; ++z) f[static_cast<std::size_t>(z)] = g.f(z);
  return multiplicative_expectation(K, f);
}

QLaplaceReport q_laplace_bounds(const std::vector<std::pair<double, double>>& law, double q,
                                double b) {
  check_q(q);
  double total = 0;
  for (auto [a, w] : law) total += w;
  double e_poch = 0, e_one = 0, p_le0 = 0, p_geb = 0, p_gtmb = 0, p_lemb = 0;
  for (auto [a, w] : law) {
    double wn = w / total;
    double qa = qpow(q, a);
    double poch = std::isinf(qa) ? std::numeric_limits<double>::infinity() : q_pochhammer_inf(-qa, q);
    e_poch += wn / poch;
    e_one += std::isinf(qa) ? 0.0 : wn / (1 + qa);
    if (a <= 0) p_le0 += wn;
    if (a >= b) p_geb += wn;
    if (a > -b) p_gtmb += wn;
    if (a <= -b) p_lemb += wn;
  }
  QLaplaceReport rep;
  double qb = qpow(q, b);
  rep.za1 = {p_le0, 2 * (1 - e_poch)};
  rep.za2 = {std::exp(qb / (q - 1)) * p_geb, e_poch};
  rep.za3 = {e_one, p_gtmb + (p_lemb > 0 ? qb * p_lemb : 0.0)};
  const double tol = 1e-12;
  rep.ok1 = rep.za1.first <= rep.za1.second + tol;
  rep.ok2 = rep.za2.first <= rep.za2.second + tol;
  rep.ok3 = rep.za3.first <= rep.za3.second + tol;
  return rep;
}

QLaplaceReport q_laplace_bounds(const std::vector<double>& samples, double q, double b) {
  std::vector<std::pair<double, double>> law;
  law.reserve(samples.size());
  for (double a : samples) law.emplace_back(a, 1.0);
  return q_laplace_bounds(law, q, b);
}

std::string kernel_csv(const KernelMatrix& K) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,K\n";
  for (int x = 0; x < K.N; ++x)
    for (int y = 0; y < K.N; ++y) os << x << ',' << y << ',' << K.K(x, y) << '\n';
  return os.str();
}

}  // namespace asep::dpp
