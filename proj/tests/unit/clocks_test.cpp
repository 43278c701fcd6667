#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "asep/clocks.hpp"
#include "asep/config.hpp"
#include "asep/error.hpp"
#include "asep/stats.hpp"
#include "doctest.h"

using namespace asep;

namespace {

std::vector<double> stream_times(const ClockWindow& w, Site s, Direction d) {
  std::vector<double> t;
  for (const auto& e : w.events())
    if (e.site == s && e.dir == d) t.push_back(e.time);
  return t;
}

double chi2_upper(double stat, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

}  // namespace

TEST_SUITE("clocks") {

TEST_CASE("make_rates") {
  CHECK(make_rates(1, 0).q() == 0.0);
  CHECK(make_rates(1.5, 0.5).q() == doctest::Approx(1.0 / 3).epsilon(1e-15));
  try {
    make_rates(1, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RateConstraintViolated);
  }
  CHECK_THROWS_AS(make_rates(0.5, 1.5), Error);
  CHECK_THROWS_AS(make_rates(0.5, -0.5), Error);
}

TEST_CASE("TASEP clock has no left arrows and Poisson right counts") {
  auto r = make_rates(1, 0);
  double total = 0;
  const int reps = 4000;
  for (int i = 0; i < reps; ++i) {
    auto w = sample_clock_window(r, {0, 0}, 10, 1000 + i);
    for (const auto& e : w.events()) REQUIRE(e.dir == Direction::Right);
    total += double(w.size());
  }
  // mean 10, sd of the mean sqrt(10/reps)
  CHECK(std::abs(total / reps - 10) <= 3 * std::sqrt(10.0 / reps));
}

TEST_CASE("total event count on 100 sites") {
  auto r = make_rates(1.5, 0.5);
  const int reps = 200;
  double sum = 0;
  ClockWindow w;
  for (int i = 0; i < reps; ++i) {
    resample_clock_window(w, r, {0, 99}, 100, 77 + i);
    sum += double(w.size());
  }
  // Poisson(20000) per replica
  CHECK(std::abs(sum / reps - 20000) <= 3 * std::sqrt(20000.0 / reps));
}

TEST_CASE("determinism and ordering") {
  auto r = make_rates(1.5, 0.5);
  auto a = sample_clock_window(r, {-5, 5}, 20, 42);
  auto b = sample_clock_window(r, {-5, 5}, 20, 42);
  CHECK(a.events() == b.events());
  auto c = sample_clock_window(r, {-5, 5}, 20, 43);
  CHECK(a.events() != c.events());
  auto ev = events_in_order(a);
  CHECK(ev.size() == a.size());
  for (std::size_t i = 1; i < ev.size(); ++i) CHECK(event_before(ev[i - 1], ev[i]));
  for (const auto& e : ev) {
    CHECK(e.time < a.horizon());
    CHECK(a.sites().contains(e.site));
  }
  ClockWindow empty;
  CHECK(events_in_order(empty).empty());
}

TEST_CASE("enlarging the window keeps the existing streams") {
  auto r = make_rates(1.5, 0.5);
  auto small = sample_clock_window(r, {0, 3}, 15, 9);
  auto big = sample_clock_window(r, {-10, 20}, 15, 9);
  for (Site s = 0; s <= 3; ++s)
    for (auto d : {Direction::Left, Direction::Right})
      CHECK(stream_times(small, s, d) == stream_times(big, s, d));
}

TEST_CASE("merge of two sub-windows equals the joint window") {
  auto r = make_rates(2, 1);
  auto left = sample_clock_window(r, {-4, 0}, 12, 5);
  auto right = sample_clock_window(r, {1, 6}, 12, 5);
  auto joint = sample_clock_window(r, {-4, 6}, 12, 5);
  auto merged = merge_clock_windows(left, right);
  CHECK(merged.sites() == joint.sites());
  CHECK(merged.events() == joint.events());
  auto other = sample_clock_window(r, {7, 9}, 12, 6);
  CHECK_THROWS_AS(merge_clock_windows(right, other), Error);
}

TEST_CASE("inter-arrival times are exponential") {
  // per-seed KS p-values, which must themselves look uniform
  auto r = make_rates(1.5, 0.5);
  std::vector<double> ps;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto w = sample_clock_window(r, {0, 0}, 4000, seed);
    for (auto [d, rate] : {std::pair{Direction::Right, 1.5}, std::pair{Direction::Left, 0.5}}) {
      auto t = stream_times(w, 0, d);
      std::vector<double> gaps;
      double prev = 0;
      for (double x : t) {
        gaps.push_back(x - prev);
        prev = x;
      }
      REQUIRE(gaps.size() >= 1500);
      ps.push_back(stats::ks_one_sample(gaps, [rate = rate](double x) { return 1 - std::exp(-rate * x); }).p);
    }
  }
  CHECK(stats::ks_uniform(ps, 0, 1).p > 0.001);
  CHECK(*std::min_element(ps.begin(), ps.end()) > 1e-4);
}

TEST_CASE("counts on disjoint intervals: Poisson dispersion and independence") {
  auto r = make_rates(1.5, 0.5);
  const int n = 4000;
  auto w = sample_clock_window(r, {0, 0}, n, 31);
  std::vector<int> c(n, 0);
  for (const auto& e : w.events())
    if (e.dir == Direction::Right) ++c[static_cast<std::size_t>(e.time)];
  double disp = 0;
  for (int k : c) disp += (k - 1.5) * (k - 1.5) / 1.5;
  double p = chi2_upper(disp, n);
  CHECK(p > 0.005);
  CHECK(p < 0.995);

  // contingency of consecutive counts, bins 0,1,2,3+
  std::array<std::array<double, 4>, 4> tab{};
  for (int i = 0; i + 1 < n; i += 2) tab[std::min(c[i], 3)][std::min(c[i + 1], 3)] += 1;
  double tot = 0;
  std::array<double, 4> row{}, col{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      row[a] += tab[a][b];
      col[b] += tab[a][b];
      tot += tab[a][b];
    }
  double x2 = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double e = row[a] * col[b] / tot;
      x2 += (tab[a][b] - e) * (tab[a][b] - e) / e;
    }
  CHECK(chi2_upper(x2, 9) > 0.01);
}

TEST_CASE("serialized window replays the trajectory bit-exactly") {
  auto r = make_rates(1.5, 0.5);
  auto w = sample_clock_window(r, {-20, 20}, 8, 123);
  std::stringstream ss;
  write_clock_window(ss, w);
  auto back = read_clock_window(ss);
  CHECK(back.events() == w.events());
  CHECK(back.seed() == w.seed());
  CHECK(back.rates() == w.rates());

  auto init = init_step({-20, 20});
  auto t1 = evolve(init, std::make_shared<ClockWindow>(w), 8, {2, 4, 8});
  auto t2 = evolve(init, std::make_shared<ClockWindow>(back), 8, {2, 4, 8});
  REQUIRE(t1.checkpoints.size() == t2.checkpoints.size());
  for (std::size_t i = 0; i < t1.checkpoints.size(); ++i)
    CHECK(t1.checkpoints[i].config == t2.checkpoints[i].config);
}

}  // TEST_SUITE
