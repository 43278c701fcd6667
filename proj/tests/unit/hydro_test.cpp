#include <cmath>

#include "asep/error.hpp"
#include "asep/hydro.hpp"
#include "asep/random.hpp"
#include "doctest.h"

using namespace asep;
using namespace asep::hydro;

namespace {

// composite Simpson, independent of the closed forms
double simpson(const ProfileFn& f, double a, double b, int n = 20000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_SUITE("hydro") {

TEST_CASE("point values") {
  CHECK(ProfileFn::upsilon_fan(1, 0)(0) == 0.5);
  auto xi = ProfileFn::xi_step(0.7, 0.2);
  CHECK(xi(-5) == 0.7);
  CHECK(xi(5) == 0.2);
  double rho = 0.4, eps = 0.3, beta = 0.2;
  auto phi = ProfileFn::phi_eps_beta(rho, eps, beta);
  double zb = 0.5 - beta;
  CHECK(phi(zb) == doctest::Approx(rho + eps * beta).epsilon(1e-15));
  CHECK(phi(std::nextafter(zb, 0.0)) == doctest::Approx(rho + eps * beta).epsilon(1e-12));
  CHECK(phi(std::nextafter(zb, 1.0)) == doctest::Approx(rho + eps * beta).epsilon(1e-12));
  auto ue = ProfileFn::upsilon_eps(0.5, 0.4);
  CHECK(ue(0) == doctest::Approx(0.7));
  CHECK(ue(1) == doctest::Approx(0.3));
  CHECK_THROWS_AS(ProfileFn::upsilon_eps(0.1, 0.2), Error);
  CHECK_THROWS_AS(ProfileFn::upsilon_fan(0.2, 0.5), Error);
}

TEST_CASE("fan is continuous and non-increasing") {
  Stream rng(1, 2);
  for (int k = 0; k < 200; ++k) {
    double rho = rng.uniform(), lambda = rho * rng.uniform();
    auto f = ProfileFn::upsilon_fan(rho, lambda);
    double prev = f(-2);
    for (double z = -2; z <= 2; z += 1e-3) {
      double v = f(z);
      CHECK(v <= prev + 1e-15);
      CHECK(std::abs(v - prev) <= 5e-4 + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("range stays in [0,1] on valid parameters") {
  Stream rng(3, 4);
  for (int k = 0; k < 100000; ++k) {
    double eps = 0.01 + 0.48 * rng.uniform();
    double rho = eps + (1 - 2 * eps) * rng.uniform();
    double beta = 0.01 + 0.48 * rng.uniform();
    double S = 1 + 1000 * rng.uniform(), T = 1000 * rng.uniform();
    double lambda = rho * rng.uniform();
    double z = -3 + 6 * rng.uniform();
    for (double v : {ProfileFn::upsilon_fan(rho, lambda)(z), ProfileFn::upsilon_eps(rho, eps)(z),
                     ProfileFn::phi_eps_beta(rho, eps, beta)(z), ProfileFn::xi_step(rho, lambda)(z),
                     ProfileFn::parabola(1 + T)(z * T)}) {
      REQUIRE(v >= 0);
      REQUIRE(v <= 1);
    }
    // evolved forms are only valid on the support of the evolved data
    double zl = -eps * S / (4 * std::max(T, 1.0));
    double ev = evolved_flat(S, T, rho, eps, beta, std::max(z, zl));
    REQUIRE(ev >= 0);
    (void)ev;
  }
}

TEST_CASE("integrals are exact and additive") {
  auto c = ProfileFn::xi_step(0.3, 0.1);
  CHECK(c.integral(-4, -1) == doctest::Approx(0.9));
  CHECK(ProfileFn::upsilon_fan(1, 0).integral(-1, 1) == doctest::Approx(1).epsilon(1e-15));

  std::vector<ProfileFn> ps{ProfileFn::upsilon_fan(0.8, 0.1), ProfileFn::upsilon_eps(0.5, 0.3),
                            ProfileFn::phi_eps_beta(0.4, 0.2, 0.15), ProfileFn::evolved_linear(50, 10, 0.4),
                            ProfileFn::evolved_flat(50, 10, 0.4, 0.2, 0.15), ProfileFn::parabola(7),
                            ProfileFn::piecewise_linear({{-1, 0.9}, {0, 0.5}, {2, 0.6}})};
  Stream rng(5, 6);
  for (const auto& p : ps)
    for (int k = 0; k < 200; ++k) {
      double a = -3 + 6 * rng.uniform(), b = -3 + 6 * rng.uniform(), cc = -3 + 6 * rng.uniform();
      CHECK(std::abs(p.integral(a, cc) - p.integral(a, b) - p.integral(b, cc)) <= 1e-12);
    }
  // Simpson only where the density is continuous
  for (std::size_t i : {0, 3, 5})
    CHECK(ps[i].integral(-2.5, 2.5) == doctest::Approx(simpson(ps[i], -2.5, 2.5)).epsilon(1e-6));
  CHECK(ps[6].integral(-1, 0) == doctest::Approx(simpson(ps[6], -1, 0)).epsilon(1e-9));
  CHECK(ps[6].integral(0, 2) == doctest::Approx(simpson(ps[6], 0, 2)).epsilon(1e-9));
  // jump profiles: Simpson piecewise between the jumps
  auto ue = ProfileFn::upsilon_eps(0.5, 0.3);
  CHECK(ue.integral(-2.5, 2.5) == doctest::Approx(simpson(ue, -2.5, std::nextafter(0.0, -1.0)) + simpson(ue, 0, std::nextafter(1.0, 0.0)) + simpson(ue, std::nextafter(1.0, 2.0), 2.5)).epsilon(1e-6));
}

TEST_CASE("parabola height matches the integrated density") {
  const double T = 40;
  auto d = ProfileFn::parabola(T);
  for (double X : {-50.0, -40.0, -13.0, 0.0, 22.0})
    for (double Y : {-30.0, 0.0, 5.0, 39.0, 60.0}) {
      if (Y < X) continue;
      CHECK(d.integral(X, Y) == doctest::Approx(parabola_height(T, X) - parabola_height(T, Y)).epsilon(1e-12));
      if (std::abs(X) <= T && std::abs(Y) <= T)
        CHECK(d.integral(X, Y) ==
              doctest::Approx(((T - X) * (T - X) - (T - Y) * (T - Y)) / (4 * T)).epsilon(1e-12));
    }
}

TEST_CASE("evolved linear and flat profiles") {
  double S = 400, T = 25, rho = 0.35, eps = 0.2, beta = 0.1;
  CHECK(evolved_linear(S, T, rho, 1 - 2 * rho) == doctest::Approx(rho).epsilon(1e-15));
  CHECK(evolved_linear(S, 1e-12, rho, 0.3) == doctest::Approx(rho).epsilon(1e-10));
  Stream rng(7, 8);
  for (int k = 0; k < 1000; ++k) {
    double X = -200 + 400 * rng.uniform(), Y = -200 + 400 * rng.uniform();
    double mass = evolved_linear_mass(S, T, rho, X, Y);
    double integ = T * ProfileFn::evolved_linear(S, T, rho).integral(X / T, Y / T);
    CHECK(std::abs(mass - integ) <= 1e-10 * std::max(1.0, std::abs(mass)));
  }
  double zs = evolved_flat_switch(S, T, rho, eps, beta);
  for (double z = -20; z <= 20; z += 0.01) {
    double f = evolved_flat(S, T, rho, eps, beta, z), l = evolved_linear(S, T, rho, z);
    CHECK(f >= l);
    if (z <= zs) CHECK(f == l);
    if (z > zs + 1e-9) CHECK(f > l);
  }
}

TEST_CASE("characteristic quantities") {
  auto a = characteristic_quantities(1);
  CHECK(a.m == 0);
  CHECK(a.f == 0);
  auto b = characteristic_quantities(0);
  CHECK(b.m == 0.25);
  CHECK(b.f == doctest::Approx(std::pow(0.25, 2.0 / 3)).epsilon(1e-15));
  auto c = characteristic_quantities(-1);
  CHECK(c.m == 1);
  CHECK(c.f == doctest::Approx(0.0));
  CHECK(characteristic_speed(0.25) == 0.5);
  CHECK_THROWS_AS(characteristic_quantities(1.5), Error);
}

TEST_CASE("injection probabilities") {
  double S = 1e6, g = 0.1, rho = 0.4;
  auto p = injection_probability(-1, S, rho, g);
  CHECK(p.value == doctest::Approx(std::pow(S, -g) / (1 - rho)).epsilon(1e-5));
  CHECK(p.valid);

  // first plus second class density equals rho + S^-gamma
  Stream rng(9, 10);
  for (int k = 0; k < 2000; ++k) {
    double SS = 10 + 1e5 * rng.uniform(), gg = 0.01 + 0.98 * rng.uniform(), rr = 0.05 + 0.9 * rng.uniform();
    long left = injection_left_end(SS, gg);
    long j = -1 - static_cast<long>(rng.below(static_cast<std::uint64_t>(-left)));
    auto q = injection_probability(j, SS, rr, gg);
    if (!std::isfinite(q.value)) continue;
    double first = rr - double(j) / (2 * SS);
    CHECK(std::abs(first + (1 - rr + double(j) / (2 * SS)) * q.value - (rr + std::pow(SS, -gg))) <= 1e-12);
  }

  auto bad = injection_probability(-1, 50, 0.9, 0.01);
  CHECK_FALSE(bad.valid);
  CHECK(bad.value > 1);
  try {
    injection_probability(0, S, rho, g);
    FAIL("expected JOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::JOutOfRange);
  }
  CHECK_THROWS_AS(injection_probability(injection_left_end(S, g) - 1, S, rho, g), Error);
}

TEST_CASE("knot export") {
  auto csv = profile_csv(ProfileFn::upsilon_fan(0.75, 0.25), -1, 1);
  CHECK(csv.rfind("z,density\n", 0) == 0);
  CHECK(csv.find("-0.5,0.75") != std::string::npos);
}

}  // TEST_SUITE
