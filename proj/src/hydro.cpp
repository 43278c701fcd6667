#include "asep/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "asep/error.hpp"

namespace asep::hydro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ParameterOutOfRange, what);
}

void check_eps_rho(double rho, double eps) {
  require(eps > 0 && eps < 0.5, "eps must lie in (0, 1/2)");
  require(rho >= eps && rho <= 1 - eps, "rho must lie in [eps, 1-eps]");
}

}  // namespace

ProfileFn ProfileFn::xi_step(double rho, double lambda) {
  require(rho >= 0 && rho <= 1 && lambda >= 0 && lambda <= 1, "densities must lie in [0,1]");
  ProfileFn p;
  p.kind_ = ProfileKind::XiStep;
  p.rho_ = rho;
  p.lambda_ = lambda;
  p.seg_ = {{-kInf, 0, rho, 0}, {0, kInf, lambda, 0}};
  return p;
}

ProfileFn ProfileFn::upsilon_fan(double rho, double lambda) {
  require(lambda >= 0 && lambda <= rho && rho <= 1, "need 0 <= lambda <= rho <= 1");
  ProfileFn p;
  p.kind_ = ProfileKind::UpsilonFan;
  p.rho_ = rho;
  p.lambda_ = lambda;
  double z1 = 1 - 2 * rho, z2 = 1 - 2 * lambda;
  p.seg_ = {{-kInf, z1, rho, 0}, {z1, z2, 0.5, -0.5}, {z2, kInf, lambda, 0}};
  return p;
}

ProfileFn ProfileFn::upsilon_eps(double rho, double eps) {
  check_eps_rho(rho, eps);
  ProfileFn p;
  p.kind_ = ProfileKind::UpsilonEps;
  p.rho_ = rho;
  p.eps_ = eps;
  p.seg_ = {{-kInf, 0, 0, 0}, {0, 1, rho + eps / 2, -eps}, {1, kInf, 0, 0}};
  return p;
}

ProfileFn ProfileFn::phi_eps_beta(double rho, double eps, double beta) {
  check_eps_rho(rho, eps);
  require(beta > 0 && beta < 0.5, "beta must lie in (0, 1/2)");
  ProfileFn p;
  p.kind_ = ProfileKind::PhiEpsBeta;
  p.rho_ = rho;
  p.eps_ = eps;
  p.beta_ = beta;
  double zb = 0.5 - beta;
  p.seg_ = {{-kInf, 0, 0, 0}, {0, zb, rho + eps / 2, -eps}, {zb, 1, rho + eps * beta, 0},
            {1, kInf, 0, 0}};
  return p;
}

ProfileFn ProfileFn::evolved_linear(double S, double T, double rho) {
  require(S > 0 && T >= 0, "need S > 0 and T >= 0");
  require(rho >= 0 && rho <= 1, "rho must lie in [0,1]");
  ProfileFn p;
  p.kind_ = ProfileKind::EvolvedLinear;
  p.S_ = S;
  p.T_ = T;
  p.rho_ = rho;
  double k = T / (2 * (S + T));
  p.seg_ = {{-kInf, kInf, rho + (1 - 2 * rho) * k, -k}};
  return p;
}

ProfileFn ProfileFn::evolved_flat(double S, double T, double rho, double eps, double beta) {
  require(S > 0 && T >= 0, "need S > 0 and T >= 0");
  check_eps_rho(rho, eps);
  require(beta > 0 && beta < 0.5, "beta must lie in (0, 1/2)");
  ProfileFn p;
  p.kind_ = ProfileKind::EvolvedFlat;
  p.S_ = S;
  p.T_ = T;
  p.rho_ = rho;
  p.eps_ = eps;
  p.beta_ = beta;
  double flat = rho + eps * beta;
  if (T == 0) {
    p.seg_ = {{-kInf, kInf, flat, 0}};
  } else {
    double k = T / (2 * (S + T));
    double zs = evolved_flat_switch(S, T, rho, eps, beta);
    p.seg_ = {{-kInf, zs, rho + (1 - 2 * rho) * k, -k}, {zs, kInf, flat, 0}};
  }
  return p;
}

ProfileFn ProfileFn::parabola(double T) {
  require(T > 0, "T must be positive");
  ProfileFn p;
  p.kind_ = ProfileKind::Parabola;
  p.T_ = T;
  p.seg_ = {{-kInf, -T, 1, 0}, {-T, T, 0.5, -0.5 / T}, {T, kInf, 0, 0}};
  return p;
}

ProfileFn ProfileFn::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  require(!knots.empty(), "need at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(knots[i].second >= 0 && knots[i].second <= 1, "knot values must lie in [0,1]");
    if (i > 0) require(knots[i].first > knots[i - 1].first, "knots must be strictly increasing");
  }
  ProfileFn p;
  p.kind_ = ProfileKind::PiecewiseLinear;
  p.pts_ = knots;
  p.seg_.push_back({-kInf, knots.front().first, knots.front().second, 0});
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    auto [z0, v0] = knots[i];
    auto [z1, v1] = knots[i + 1];
    double slope = (v1 - v0) / (z1 - z0);
    p.seg_.push_back({z0, z1, v0 - slope * z0, slope});
  }
  p.seg_.push_back({knots.back().first, kInf, knots.back().second, 0});
  return p;
}

double ProfileFn::eval(double z) const {
  switch (kind_) {
    case ProfileKind::XiStep:
      return z <= 0 ? rho_ : lambda_;
    case ProfileKind::UpsilonFan:
      if (z <= 1 - 2 * rho_) return rho_;
      if (z >= 1 - 2 * lambda_) return lambda_;
      return (1 - z) / 2;
    case ProfileKind::UpsilonEps:
      return z >= 0 && z <= 1 ? rho_ + eps_ * (0.5 - z) : 0.0;
    case ProfileKind::PhiEpsBeta:
      if (z < 0 || z > 1) return 0.0;
      return z <= 0.5 - beta_ ? rho_ + eps_ * (0.5 - z) : rho_ + eps_ * beta_;
    case ProfileKind::EvolvedLinear:
      return hydro::evolved_linear(S_, T_, rho_, z);
    case ProfileKind::EvolvedFlat:
      return hydro::evolved_flat(S_, T_, rho_, eps_, beta_, z);
    case ProfileKind::Parabola:
      if (z <= -T_) return 1.0;
      if (z >= T_) return 0.0;
      return (1 - z / T_) / 2;
    case ProfileKind::PiecewiseLinear:
      break;
  }
  for (const auto& s : seg_)
    if (z <= s.b) return s.c0 + s.c1 * z;
  return seg_.back().c0;
}

double ProfileFn::integral(double a, double b) const {
  if (a > b) return -integral(b, a);
  double total = 0;
  for (const auto& s : seg_) {
    double l = std::max(a, s.a), u = std::min(b, s.b);
    if (l >= u) continue;
    total += (u - l) * (s.c0 + s.c1 * (u + l) / 2);
  }
  return total;
}

std::vector<std::pair<double, double>> ProfileFn::knots(double zmin, double zmax) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : seg_) {
    double l = std::max(zmin, s.a), u = std::min(zmax, s.b);
    if (l > u) continue;
    out.emplace_back(l, s.c0 + s.c1 * l);
    out.emplace_back(u, s.c0 + s.c1 * u);
  }
  return out;
}

double evolved_linear(double S, double T, double rho, double z) {
  return rho + (1 - 2 * rho - z) * T / (2 * (S + T));
}

double evolved_flat(double S, double T, double rho, double eps, double beta, double z) {
  return std::max(evolved_linear(S, T, rho, z), rho + eps * beta);
}

double evolved_flat_switch(double S, double T, double rho, double eps, double beta) {
  return 1 - 2 * rho - 2 * eps * beta * (S + T) / T;
}

double evolved_linear_mass(double S, double T, double rho, double X, double Y) {
  return (rho + T * (1 - 2 * rho) / (2 * (S + T))) * (Y - X) - (Y * Y - X * X) / (4 * (S + T));
}

double parabola_height(double T, double x) {
  if (x <= -T) return -x;
  if (x >= T) return 0;
  return (T - x) * (T - x) / (4 * T);
}

Characteristic characteristic_quantities(double nu) {
  require(nu >= -1 && nu <= 1, "nu must lie in [-1,1]");
  double m = (1 - nu) / 2;
  return {m * m, std::cbrt(std::pow((1 - nu * nu) / 4, 2.0)), (1 - nu) / 2};
}

long injection_left_end(double S, double gamma) {
  return static_cast<long>(std::floor(-2 * std::pow(S, 1 - gamma)));
}

Injection injection_probability(long j, double S, double rho_S, double gamma) {
  require(S > 1, "S must exceed 1");
  require(gamma > 0 && gamma < 1, "gamma must lie in (0,1)");
  if (j > -1 || j < injection_left_end(S, gamma))
    throw Error(ErrorCode::JOutOfRange, "j=" + std::to_string(j) + " outside the injection range");
  double num = std::pow(S, -gamma) + double(j) / (2 * S);
  double den = 1 - rho_S + double(j) / (2 * S);
  if (den <= 0) return {std::numeric_limits<double>::infinity(), false};
  double p = num / den;
  // the floor in the range can push the left end below zero by at most 1/(2S)
  double slack = 1 / (2 * S * den);
  return {p, p >= -slack && p <= 1};
}

std::string profile_csv(const ProfileFn& p, double zmin, double zmax) {
  std::ostringstream os;
  os << "z,density\n";
  os.precision(17);
  for (auto [z, v] : p.knots(zmin, zmax)) os << z << ',' << v << '\n';
  return os.str();
}

}  // namespace asep::hydro
