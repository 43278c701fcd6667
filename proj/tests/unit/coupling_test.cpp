#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "asep/coupling.hpp"
#include "asep/error.hpp"
#include "asep/random.hpp"
#include "doctest.h"

using namespace asep;

namespace {

constexpr Label H = kHole;

std::shared_ptr<const ClockWindow> clock_for(const JumpRates& r, SiteInterval w, double t, std::uint64_t seed) {
  return std::make_shared<ClockWindow>(sample_clock_window(r, w, t, seed));
}

// zeta = eta plus extra particles at a random subset of the holes
SpeciesConfig add_particles(const SpeciesConfig& eta, double p, std::uint64_t seed) {
  SpeciesConfig z = eta;
  Stream rng(seed, 77);
  for (auto& l : z.labels)
    if (l == H && rng.bernoulli(p)) l = 1;
  return z;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

}  // namespace

TEST_SUITE("coupling") {

TEST_CASE("identical initial data give identical trajectories") {
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-30, 30};
  auto c = init_bernoulli(w, 0.5, 0.5, 1);
  auto run = couple({c, c}, clock_for(r, w, 10, 2), 10, {1, 5, 10});
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(run.members[0].second.checkpoints[k].config == run.members[1].second.checkpoints[k].config);
  auto rep = check_attractivity(run, {0, 1});
  CHECK(rep.pass);
  CHECK(rep.checks == 3 * 61);
  CHECK(check_monotonicity(run, {0, 1}, {MonotoneForm::Close, 0}).pass);
  CHECK(code_of([&] { couple({c, init_step({-5, 5})}, run.clock, 10, {}); }) == ErrorCode::WindowMismatch);
}

TEST_CASE("attractivity holds on every seed") {
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-60, 60};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto eta = init_bernoulli(w, 0.6, 0.2, seed);
    auto zeta = add_particles(eta, 0.3, seed);
    auto clock = clock_for(r, w, 20, seed + 1000);
    auto run = couple({eta, zeta}, clock, 20, {5, 10, 20});
    REQUIRE(check_attractivity(run, {0, 1}).pass);
    REQUIRE(attractivity_pathwise(eta, zeta, *clock, 20).pass);
  }
  auto eta = init_bernoulli(w, 0.5, 0.5, 3);
  auto zeta = add_particles(eta, 0.5, 3);
  auto clock = clock_for(r, w, 1, 3);
  CHECK(code_of([&] { check_attractivity(couple({zeta, eta}, clock, 1, {1}), {0, 1}); }) ==
        ErrorCode::NotInitiallyOrdered);
}

TEST_CASE("attractivity check detects independent clocks") {
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-60, 60};
  std::size_t failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto eta = init_bernoulli(w, 0.6, 0.2, seed);
    auto zeta = add_particles(eta, 0.3, seed);
    CoupledRun fake;
    fake.clock = clock_for(r, w, 20, seed);
    fake.members.emplace_back("eta", evolve(eta, clock_for(r, w, 20, seed), 20, {5, 10, 20}));
    fake.members.emplace_back("zeta", evolve(zeta, clock_for(r, w, 20, seed + 1), 20, {5, 10, 20}));
    auto rep = check_attractivity(fake, {0, 1});
    if (!rep.pass) {
      ++failures;
      CHECK(rep.first.has_value());
      CHECK(rep.describe().find("FAIL") == 0);
    }
  }
  CHECK(failures > 0);
}

TEST_CASE("height monotonicity, ordered and close forms") {
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-80, 80};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto step = init_step(w, StepVariant::Pure);
    auto bern = init_bernoulli(w, 0.5, 0.0, seed);
    auto clock = clock_for(r, w, 20, seed + 7);
    std::int64_t Hs = minimal_shift(step, bern);
    REQUIRE(monotonicity_pathwise(step, bern, *clock, 20, {MonotoneForm::Ordered, Hs}).pass);
    auto run = couple({step, bern}, clock, 20, {2, 10, 20});
    REQUIRE(check_monotonicity(run, {0, 1}, {MonotoneForm::Ordered, Hs}).pass);

    auto a = init_bernoulli(w, 0.7, 0.3, seed);
    auto b = init_bernoulli(w, 0.7, 0.3, seed + 5000);
    std::int64_t K = sup_distance(a, b);
    REQUIRE(monotonicity_pathwise(a, b, *clock, 20, {MonotoneForm::Close, K}).pass);
  }
  auto a = init_bernoulli(w, 0.7, 0.3, 1);
  auto b = init_bernoulli(w, 0.7, 0.3, 2);
  auto clock = clock_for(r, w, 1, 1);
  std::int64_t K = sup_distance(a, b);
  REQUIRE(K > 0);
  CHECK(code_of([&] { monotonicity_pathwise(a, b, *clock, 1, {MonotoneForm::Close, K - 1}); }) ==
        ErrorCode::PremiseViolatedAtTimeZero);
}

TEST_CASE("finite speed of propagation") {
  auto r = make_rates(1, 0);
  SiteInterval w{-150, 150};
  const double T = 15;
  SiteInterval inner{-100 + static_cast<Site>(4 * T), 100 - static_cast<Site>(4 * T)};
  int differ = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto a = init_bernoulli(w, 0.5, 0.5, seed);
    auto b = a;
    for (Site x = w.lo; x <= w.hi; ++x)
      if (x < -100 || x > 100) b.at(x) = a.at(x) == H ? 1 : H;
    differ += first_disagreement(a, b, *clock_for(r, w, T, seed), T, inner) >= 0;
  }
  CHECK(differ <= 300 * 4 * std::exp(-T / 3) + 3 * std::sqrt(300 * 0.03));
}

TEST_CASE("second class decomposition") {
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-40, 40};
  auto eta = init_bernoulli(w, 0.5, 0.5, 4);
  auto same = second_class_decompose(eta, eta);
  CHECK(std::accumulate(same.alpha.begin(), same.alpha.end(), 0) == 0);
  CHECK(same.positions.empty());

  std::vector<Site> holes;
  for (Site x = -5; x <= 5; ++x)
    if (eta.at(x) == H) holes.push_back(x);
  REQUIRE(holes.size() >= 3);
  for (std::size_t n : {std::size_t(1), std::size_t(3)}) {
    auto zeta = eta;
    for (std::size_t i = 0; i < n; ++i) zeta.at(holes[i]) = 1;
    auto run = couple({eta, zeta}, clock_for(r, w, 10, 9), 10, {0, 2, 5, 10});
    for (std::size_t k = 0; k < 4; ++k) {
      auto set = second_class_decompose(run, {0, 1}, k);
      CHECK(std::accumulate(set.alpha.begin(), set.alpha.end(), std::size_t(0)) == n);
      CHECK(set.positions.size() == n);
      CHECK(std::is_sorted(set.positions.rbegin(), set.positions.rend()));
      for (Site p : set.positions) CHECK(set.base.at(p) == H);
    }
  }
  auto bigger = add_particles(eta, 0.5, 1);
  CHECK(code_of([&] { second_class_decompose(bigger, eta); }) == ErrorCode::DominationBroken);
}

TEST_CASE("second class particles follow the coupled discrepancies") {
  // eta with a second class particle evolves exactly like the pair (eta, eta + 1)
  auto r = make_rates(1.5, 0.5);
  SiteInterval w{-40, 40};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto eta = init_bernoulli(w, 0.5, 0.5, seed);
    for (Site x = 0;; ++x)
      if (eta.at(x) == H) {
        auto zeta = eta;
        zeta.at(x) = 1;
        auto two = with_second_class(eta, {x});
        auto clock = clock_for(r, w, 8, seed);
        auto run = couple({eta, zeta, two}, clock, 8, {8});
        auto set = second_class_decompose(run, {0, 1}, 0);
        const auto& c2 = run.members[2].second.checkpoints[0].config;
        REQUIRE(set.positions.size() == 1);
        CHECK(c2.at(set.positions[0]) == 2);
        break;
      }
  }
}

TEST_CASE("coupling inequality, exact small windows") {
  auto r = make_rates(1.5, 0.5);
  SpeciesConfig eta({0, 5}, {1, H, H, 1, H, H});
  // N = 1: same process on both sides
  for (Site y = 0; y <= 5; ++y) {
    auto p = rez_bound_exact(eta, 2, {2}, y, 1.0, r);
    CHECK(p.lhs == doctest::Approx(p.rhs).epsilon(1e-12));
  }
  // t = 0 reduces to the rightmost-particle ordering
  for (Site y = 0; y <= 5; ++y) {
    auto p = rez_bound_exact(eta, 4, {1, 4}, y, 0.0, r);
    CHECK(p.lhs == (y >= 4 ? 1.0 : 0.0));
    CHECK(p.rhs == doctest::Approx(((y >= 1) + (y >= 4)) / 2.0));
  }
  RezOracle oracle(r);
  for (auto alpha : {std::vector<Site>{1, 2}, std::vector<Site>{2, 4}, std::vector<Site>{1, 4}}) {
    Site x0 = *std::max_element(alpha.begin(), alpha.end());
    for (const auto& p : oracle.curve(eta, x0, alpha, 1.0)) CHECK(p.lhs <= p.rhs + 1e-8);
  }
  CHECK(rez_bound_exact(eta, 4, {1, 4}, 10, 1.0, r).lhs == 1.0);
  CHECK(code_of([&] { rez_bound_exact(eta, 3, {3}, 0, 1.0, r); }) == ErrorCode::InadmissibleAlpha);
  CHECK(code_of([&] { rez_bound_exact(eta, 2, {2, 4}, 0, 1.0, r); }) == ErrorCode::InadmissibleAlpha);
  SpeciesConfig big({0, 8}, std::vector<Label>(9, H));
  CHECK(code_of([&] { rez_bound_exact(big, 2, {2}, 0, 1.0, r); }) == ErrorCode::StateSpaceTooLarge);
}

TEST_CASE("coupling inequality, Monte Carlo") {
  auto r = make_rates(1.5, 0.5);
  SpeciesConfig eta = init_bernoulli({-60, 60}, 0.5, 0.5, 8);
  std::vector<Site> alpha;
  for (Site x = 10; x >= -60 && alpha.size() < 5; --x)
    if (eta.at(x) == H) alpha.push_back(x);
  Site x0 = alpha.front();
  std::vector<Site> ys{-20, -10, 0, 10, 20, 1000};
  auto rep = rez_bound_mc(eta, x0, alpha, ys, 5, r, 2000, 3);
  CHECK(rep.pass);
  CHECK(rep.points.back().lhs == 1.0);
  CHECK(rep.points.back().rhs == 1.0);

  auto one = rez_bound_mc(eta, x0, {x0}, ys, 5, r, 1000, 4);
  for (const auto& p : one.points) CHECK(p.diff_mean == 0.0);
}

TEST_CASE("labeled second class dynamics lump onto the two-species process") {
  const double p = 1.5, q = 0.5;
  auto labeled = labeled_second_class_generator(5, 1, 2, p, q);
  auto forward = exact_generator_sector({0, 4}, {1, 2, 2, H, H}, make_rates(p, q));
  std::vector<std::size_t> block(labeled.states.size());
  for (std::size_t i = 0; i < block.size(); ++i)
    block[i] = forward.index_of(forget_labels_and_reflect(labeled.states[i]));
  auto [L, spread] = lump(labeled.Q, block, forward.states.size());
  CHECK(spread <= 1e-12);
  CHECK((L - forward.Q).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniform label order is preserved") {
  auto g = labeled_second_class_generator(5, 1, 2, 1.5, 0.5);
  // uniform mixture of both label orders on one unlabeled state
  Eigen::VectorXd init = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.states.size()));
  init(static_cast<Eigen::Index>(g.index_of(LabelTuple{H, 2, 1, 3, H}))) = 0.5;
  init(static_cast<Eigen::Index>(g.index_of(LabelTuple{H, 3, 1, 2, H}))) = 0.5;
  auto pt = exact_distribution(g, init, 1.0);
  std::map<LabelTuple, std::vector<double>> by_shape;
  for (std::size_t i = 0; i < g.states.size(); ++i)
    by_shape[forget_labels_and_reflect(g.states[i])].push_back(pt(static_cast<Eigen::Index>(i)));
  for (const auto& [shape, probs] : by_shape) {
    REQUIRE(probs.size() == 2);
    CHECK(std::abs(probs[0] - probs[1]) <= 1e-12);
  }
}

TEST_CASE("reflection adapter") {
  SiteInterval w{-3, 5};
  for (Site x = w.lo; x <= w.hi; ++x) CHECK(reflect_site(w, reflect_site(w, x)) == x);
  auto c = init_step({-2, 2});
  auto rc = reflect(c);
  CHECK(rc.labels == std::vector<Label>{H, H, 2, 1, 1});
  CHECK(reflect(rc) == c);
}

}  // TEST_SUITE
