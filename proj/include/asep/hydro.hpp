#pragma once

#include <string>
#include <utility>
#include <vector>

namespace asep::hydro {

enum class ProfileKind {
  XiStep,
  UpsilonFan,
  UpsilonEps,
  PhiEpsBeta,
  EvolvedLinear,
  EvolvedFlat,
  Parabola,
  PiecewiseLinear,
};

// value c0 + c1*z on (a, b); a or b may be infinite
struct Segment {
  double a, b, c0, c1;
};

class ProfileFn {
 public:
  static ProfileFn xi_step(double rho, double lambda);
  static ProfileFn upsilon_fan(double rho, double lambda);
  static ProfileFn upsilon_eps(double rho, double eps);
  static ProfileFn phi_eps_beta(double rho, double eps, double beta);
  static ProfileFn evolved_linear(double S, double T, double rho);
  static ProfileFn evolved_flat(double S, double T, double rho, double eps, double beta);
  // density Upsilon^{(1;0)}(x/T) in unscaled coordinates
  static ProfileFn parabola(double T);
  // linear between knots, constant beyond the end knots
  static ProfileFn piecewise_linear(std::vector<std::pair<double, double>> knots);

  ProfileKind kind() const { return kind_; }
  double operator()(double z) const { return eval(z); }
  double eval(double z) const;
  double integral(double a, double b) const;
  const std::vector<Segment>& segments() const { return seg_; }
  // (z, value) pairs at the breakpoints inside [zmin, zmax], for plotting
  std::vector<std::pair<double, double>> knots(double zmin, double zmax) const;

 private:
  ProfileKind kind_ = ProfileKind::PiecewiseLinear;
  double rho_ = 0, lambda_ = 0, eps_ = 0, beta_ = 0, S_ = 0, T_ = 0;
  std::vector<std::pair<double, double>> pts_;
  std::vector<Segment> seg_;
};

double evolved_linear(double S, double T, double rho, double z);
double evolved_flat(double S, double T, double rho, double eps, double beta, double z);
// branch point of evolved_flat: linear part on z <= this value
double evolved_flat_switch(double S, double T, double rho, double eps, double beta);
// (rho + T(1-2rho)/2(S+T))(Y-X) - (Y^2-X^2)/4(S+T)
double evolved_linear_mass(double S, double T, double rho, double X, double Y);

// limiting step height: (T-x)^2/4T on |x| <= T, -x left of -T, 0 right of T
double parabola_height(double T, double x);

struct Characteristic {
  double m;    // ((1-nu)/2)^2
  double f;    // ((1-nu^2)/4)^(2/3)
  double rho;  // density whose characteristic speed is nu
};
Characteristic characteristic_quantities(double nu);
inline double characteristic_speed(double rho) { return 1 - 2 * rho; }

inline constexpr double kDefaultGamma = 0.01;

struct Injection {
  double value;
  bool valid;  // inside [0,1]
};
// injection range [floor(-2 S^{1-gamma}), -1]
long injection_left_end(double S, double gamma = kDefaultGamma);
Injection injection_probability(long j, double S, double rho_S, double gamma = kDefaultGamma);

std::string profile_csv(const ProfileFn& p, double zmin, double zmax);

}  // namespace asep::hydro
