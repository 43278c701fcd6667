#include "asep/coupling.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <sstream>

#include "asep/error.hpp"
#include "asep/parallel.hpp"
#include "asep/random.hpp"

namespace asep {

namespace {

inline bool occ(Label l) { return l != kHole; }

// h(x) for x in [lo-1, hi]; index 0 is lo-1. Any particle counts.
std::vector<std::int64_t> extended_height(const std::vector<Label>& labels, SiteInterval w,
                                          std::int64_t initially_right) {
  std::vector<std::int64_t> h(labels.size() + 1);
  std::int64_t right = 0;
  for (Label l : labels) right += occ(l);
  h[0] = right - initially_right;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    right -= occ(labels[i]);
    h[i + 1] = right - initially_right;
  }
  (void)w;
  return h;
}

std::int64_t right_count(const SpeciesConfig& c) {
  std::int64_t n = 0;
  for (Site s = std::max<Site>(1, c.window.lo); s <= c.window.hi; ++s) n += occ(c.at(s));
  return n;
}

bool relation_holds(MonotoneSpec spec, std::int64_t hx, std::int64_t hz) {
  if (spec.form == MonotoneForm::Ordered) return hx + spec.value >= hz;
  return std::abs(hx - hz) <= spec.value;
}

void require_same_window(const SpeciesConfig& a, const SpeciesConfig& b) {
  if (!(a.window == b.window)) throw Error(ErrorCode::WindowMismatch, "members need one window");
}

}  // namespace

std::string CheckReport::describe() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " checks=" << checks;
  if (first)
    os << " first_violation(seed=" << first->seed << ", time=" << first->time
       << ", site=" << first->site << ", lhs=" << first->lhs << ", rhs=" << first->rhs << ")";
  return os.str();
}

CoupledRun couple(const std::vector<SpeciesConfig>& initials,
                  std::shared_ptr<const ClockWindow> clock, double until,
                  const std::vector<double>& checkpoints, const std::vector<std::string>& names,
                  const CoupleObserver& observer, bool tag) {
  if (initials.empty()) throw Error(ErrorCode::InvalidSpec, "nothing to couple");
  for (const auto& c : initials) {
    require_same_window(initials.front(), c);
    check_evolve_inputs(c, *clock, until, checkpoints);
  }
  std::vector<ParticleSystem> sys;
  for (const auto& c : initials) sys.emplace_back(c, tag);
  CoupledRun run;
  run.clock = clock;
  for (std::size_t m = 0; m < initials.size(); ++m) {
    Trajectory tr;
    tr.initial = initials[m];
    tr.clock = clock;
    tr.tagged = tag;
    run.members.emplace_back(m < names.size() ? names[m] : "m" + std::to_string(m), std::move(tr));
  }
  auto record = [&](double t) {
    for (std::size_t m = 0; m < sys.size(); ++m)
      run.members[m].second.checkpoints.push_back(Checkpoint{t, sys[m].config(), sys[m].origin});
  };
  std::size_t ci = 0;
  for (const ArrowEvent& e : clock->events()) {
    if (e.time >= until) break;
    while (ci < checkpoints.size() && checkpoints[ci] < e.time) record(checkpoints[ci++]);
    for (auto& s : sys) s.apply(e);
    if (observer) observer(e, sys);
  }
  while (ci < checkpoints.size()) record(checkpoints[ci++]);
  return run;
}

CheckReport check_attractivity(const CoupledRun& run, std::pair<std::size_t, std::size_t> pair) {
  const Trajectory& a = run.members.at(pair.first).second;
  const Trajectory& b = run.members.at(pair.second).second;
  const SiteInterval w = a.initial.window;
  for (Site s = w.lo; s <= w.hi; ++s)
    if (occ(a.initial.at(s)) && !occ(b.initial.at(s)))
      throw Error(ErrorCode::NotInitiallyOrdered, "not ordered at site " + std::to_string(s));
  CheckReport rep;
  for (std::size_t c = 0; c < a.checkpoints.size(); ++c) {
    const auto& ca = a.checkpoints[c].config;
    const auto& cb = b.checkpoints[c].config;
    for (Site s = w.lo; s <= w.hi; ++s) {
      ++rep.checks;
      if (occ(ca.at(s)) && !occ(cb.at(s)) && rep.pass) {
        rep.pass = false;
        rep.first = Violation{run.clock->seed(), a.checkpoints[c].time, s, 1, 0};
      }
    }
  }
  return rep;
}

std::int64_t minimal_shift(const SpeciesConfig& xi, const SpeciesConfig& zeta) {
  require_same_window(xi, zeta);
  auto hx = extended_height(xi.labels, xi.window, right_count(xi));
  auto hz = extended_height(zeta.labels, zeta.window, right_count(zeta));
  std::int64_t H = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < hx.size(); ++i) H = std::max(H, hz[i] - hx[i]);
  return H;
}

std::int64_t sup_distance(const SpeciesConfig& xi, const SpeciesConfig& zeta) {
  require_same_window(xi, zeta);
  auto hx = extended_height(xi.labels, xi.window, right_count(xi));
  auto hz = extended_height(zeta.labels, zeta.window, right_count(zeta));
  std::int64_t K = 0;
  for (std::size_t i = 0; i < hx.size(); ++i) K = std::max(K, std::abs(hz[i] - hx[i]));
  return K;
}

namespace {
void check_premise(const SpeciesConfig& xi, const SpeciesConfig& zeta, MonotoneSpec spec) {
  bool ok = spec.form == MonotoneForm::Ordered ? minimal_shift(xi, zeta) <= spec.value
                                               : sup_distance(xi, zeta) <= spec.value;
  if (!ok) throw Error(ErrorCode::PremiseViolatedAtTimeZero, "height relation fails at t = 0");
}
}  // namespace

CheckReport check_monotonicity(const CoupledRun& run, std::pair<std::size_t, std::size_t> pair,
                               MonotoneSpec spec) {
  const Trajectory& a = run.members.at(pair.first).second;
  const Trajectory& b = run.members.at(pair.second).second;
  check_premise(a.initial, b.initial, spec);
  std::int64_t ra = right_count(a.initial), rb = right_count(b.initial);
  CheckReport rep;
  for (std::size_t c = 0; c < a.checkpoints.size(); ++c) {
    auto ha = extended_height(a.checkpoints[c].config.labels, a.initial.window, ra);
    auto hb = extended_height(b.checkpoints[c].config.labels, b.initial.window, rb);
    for (std::size_t i = 0; i < ha.size(); ++i) {
      ++rep.checks;
      if (!relation_holds(spec, ha[i], hb[i]) && rep.pass) {
        rep.pass = false;
        rep.first = Violation{run.clock->seed(), a.checkpoints[c].time,
                              a.initial.window.lo - 1 + static_cast<Site>(i), ha[i], hb[i]};
      }
    }
  }
  return rep;
}

CheckReport attractivity_pathwise(const SpeciesConfig& eta, const SpeciesConfig& zeta,
                                  const ClockWindow& clock, double until) {
  require_same_window(eta, zeta);
  check_evolve_inputs(eta, clock, until, {});
  const SiteInterval w = eta.window;
  for (Site s = w.lo; s <= w.hi; ++s)
    if (occ(eta.at(s)) && !occ(zeta.at(s)))
      throw Error(ErrorCode::NotInitiallyOrdered, "not ordered at site " + std::to_string(s));
  ParticleSystem a(eta), b(zeta);
  CheckReport rep;
  for (const ArrowEvent& e : clock.events()) {
    if (e.time >= until) break;
    a.apply(e);
    b.apply(e);
    for (Site s = std::max(w.lo, e.site - 1); s <= std::min(w.hi, e.site + 1); ++s) {
      auto i = static_cast<std::size_t>(s - w.lo);
      ++rep.checks;
      if (occ(a.labels[i]) && !occ(b.labels[i]) && rep.pass) {
        rep.pass = false;
        rep.first = Violation{clock.seed(), e.time, s, 1, 0};
      }
    }
  }
  return rep;
}

CheckReport monotonicity_pathwise(const SpeciesConfig& xi, const SpeciesConfig& zeta,
                                  const ClockWindow& clock, double until, MonotoneSpec spec) {
  require_same_window(xi, zeta);
  check_evolve_inputs(xi, clock, until, {});
  check_premise(xi, zeta, spec);
  const SiteInterval w = xi.window;
  auto hx = extended_height(xi.labels, w, right_count(xi));
  auto hz = extended_height(zeta.labels, w, right_count(zeta));
  ParticleSystem a(xi), b(zeta);
  CheckReport rep;
  // a swap across bond (x, x+1) moves the height at x; index of h(x) is x - lo + 1
  auto step = [&](ParticleSystem& sys, std::vector<std::int64_t>& h, const ArrowEvent& e) -> long {
    Site s = e.site;
    Site x = e.dir == Direction::Right ? s : s - 1;
    if (x < w.lo || x + 1 > w.hi) {
      sys.apply(e);
      return -1;
    }
    auto i = static_cast<std::size_t>(x - w.lo);
    Label before = sys.labels[i];
    sys.apply(e);
    if (sys.labels[i] == before) return -1;
    h[i + 1] += occ(before) ? 1 : -1;
    return static_cast<long>(i + 1);
  };
  for (const ArrowEvent& e : clock.events()) {
    if (e.time >= until) break;
    long ia = step(a, hx, e);
    long ib = step(b, hz, e);
    for (long i : {ia, ib}) {
      if (i < 0) continue;
      ++rep.checks;
      auto k = static_cast<std::size_t>(i);
      if (!relation_holds(spec, hx[k], hz[k]) && rep.pass) {
        rep.pass = false;
        rep.first = Violation{clock.seed(), e.time, w.lo - 1 + static_cast<Site>(i), hx[k], hz[k]};
      }
    }
  }
  return rep;
}

double first_disagreement(const SpeciesConfig& xi, const SpeciesConfig& zeta,
                          const ClockWindow& clock, double until, SiteInterval inner) {
  require_same_window(xi, zeta);
  check_evolve_inputs(xi, clock, until, {});
  if (!xi.window.contains(inner)) throw Error(ErrorCode::OutOfRegion, "inner interval");
  for (Site s = inner.lo; s <= inner.hi; ++s)
    if (occ(xi.at(s)) != occ(zeta.at(s))) return 0.0;
  ParticleSystem a(xi), b(zeta);
  const SiteInterval w = xi.window;
  for (const ArrowEvent& e : clock.events()) {
    if (e.time >= until) break;
    a.apply(e);
    b.apply(e);
    for (Site s = std::max(inner.lo, e.site - 1); s <= std::min(inner.hi, e.site + 1); ++s) {
      auto i = static_cast<std::size_t>(s - w.lo);
      if (occ(a.labels[i]) != occ(b.labels[i])) return e.time;
    }
  }
  return -1.0;
}

SecondClassSet second_class_decompose(const SpeciesConfig& eta, const SpeciesConfig& zeta) {
  require_same_window(eta, zeta);
  SecondClassSet set;
  set.base = eta;
  set.alpha.assign(eta.labels.size(), 0);
  for (std::size_t i = 0; i < eta.labels.size(); ++i) {
    bool a = occ(eta.labels[i]), b = occ(zeta.labels[i]);
    if (a && !b)
      throw Error(ErrorCode::DominationBroken,
                  "site " + std::to_string(eta.window.lo + static_cast<Site>(i)));
    set.base.labels[i] = a ? 1 : kHole;
    set.alpha[i] = (b && !a) ? 1 : 0;
  }
  for (std::size_t i = eta.labels.size(); i-- > 0;)
    if (set.alpha[i]) set.positions.push_back(eta.window.lo + static_cast<Site>(i));
  return set;
}

SecondClassSet second_class_decompose(const CoupledRun& run,
                                      std::pair<std::size_t, std::size_t> pair,
                                      std::size_t checkpoint) {
  return second_class_decompose(run.members.at(pair.first).second.checkpoints.at(checkpoint).config,
                                run.members.at(pair.second).second.checkpoints.at(checkpoint).config);
}

void check_admissible(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha) {
  if (alpha.empty()) throw Error(ErrorCode::InadmissibleAlpha, "no second class particles");
  std::vector<Site> a = alpha;
  std::sort(a.begin(), a.end());
  if (std::adjacent_find(a.begin(), a.end()) != a.end())
    throw Error(ErrorCode::InadmissibleAlpha, "repeated site");
  if (a.back() != x0) throw Error(ErrorCode::InadmissibleAlpha, "x0 must be the rightmost addition");
  for (Site s : a) {
    if (!eta.window.contains(s)) throw Error(ErrorCode::InadmissibleAlpha, "outside the window");
    if (eta.at(s) != kHole) throw Error(ErrorCode::InadmissibleAlpha, "site is occupied");
  }
}

SpeciesConfig with_second_class(const SpeciesConfig& eta, const std::vector<Site>& alpha) {
  SpeciesConfig c = eta;
  for (auto& l : c.labels)
    if (l != kHole) l = 1;
  for (Site s : alpha) c.at(s) = 2;
  return c;
}

const RezOracle::Entry& RezOracle::entry(SiteInterval w, const LabelTuple& multiset, double t) {
  LabelTuple key = multiset;
  std::sort(key.begin(), key.end());
  auto k = std::make_tuple(w.lo, w.hi, key, t);
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;
  Entry e{exact_generator_sector(w, key, rates_), {}};
  e.P = transition_matrix(e.gen.Q, t);
  return cache_.emplace(k, std::move(e)).first->second;
}

std::vector<RezPoint> RezOracle::curve(const SpeciesConfig& eta, Site x0,
                                       const std::vector<Site>& alpha, double t) {
  check_admissible(eta, x0, alpha);
  const SiteInterval w = eta.window;
  SpeciesConfig one = with_second_class(eta, {x0});
  SpeciesConfig many = with_second_class(eta, alpha);
  const Entry& e1 = entry(w, one.labels, t);
  const Entry& eN = entry(w, many.labels, t);
  auto r1 = e1.P.row(static_cast<Eigen::Index>(e1.gen.index_of(one.labels)));
  auto rN = eN.P.row(static_cast<Eigen::Index>(eN.gen.index_of(many.labels)));
  double N = double(alpha.size());
  std::vector<RezPoint> out;
  for (Site y = w.lo; y <= w.hi; ++y) {
    RezPoint p{y, 0, 0};
    auto upto = static_cast<std::size_t>(y - w.lo + 1);
    for (std::size_t i = 0; i < e1.gen.states.size(); ++i) {
      const auto& s = e1.gen.states[i];
      if (std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(upto), Label(2)) !=
          s.begin() + static_cast<std::ptrdiff_t>(upto))
        p.lhs += r1(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < eN.gen.states.size(); ++i) {
      const auto& s = eN.gen.states[i];
      auto cnt = std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(upto), Label(2));
      p.rhs += rN(static_cast<Eigen::Index>(i)) * double(cnt) / N;
    }
    out.push_back(p);
  }
  return out;
}

RezPoint rez_bound_exact(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha, Site y,
                         double t, const JumpRates& rates) {
  if (static_cast<std::size_t>(eta.window.size()) > 8)
    throw Error(ErrorCode::StateSpaceTooLarge, "exact comparison needs at most 8 sites");
  RezOracle oracle(rates);
  auto curve = oracle.curve(eta, x0, alpha, t);
  if (y < eta.window.lo) return RezPoint{y, 0, 0};
  if (y > eta.window.hi) return RezPoint{y, 1, 1};
  return curve[static_cast<std::size_t>(y - eta.window.lo)];
}

RezMcReport rez_bound_mc(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha,
                         const std::vector<Site>& ys, double t, const JumpRates& rates,
                         std::size_t replicas, std::uint64_t seed, double level) {
  check_admissible(eta, x0, alpha);
  SpeciesConfig one = with_second_class(eta, {x0});
  SpeciesConfig many = with_second_class(eta, alpha);
  const SiteInterval w = eta.window;
  double N = double(alpha.size());
  // diffs[r][k] = 1{X <= y_k} - #{Z <= y_k}/N, plus the two parts
  std::vector<std::vector<double>> lhs(replicas), rhs(replicas);
  parallel_for(replicas, default_threads(), [&](std::size_t r) {
    ClockWindow clock = sample_clock_window(rates, w, t, replica_seed(seed, r));
    ParticleSystem a(one), b(many);
    advance(a, clock, 0, t);
    advance(b, clock, 0, t);
    lhs[r].resize(ys.size());
    rhs[r].resize(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
      Site y = ys[k];
      double l = 0, c = 0;
      for (Site s = w.lo; s <= std::min(y, w.hi); ++s) {
        auto i = static_cast<std::size_t>(s - w.lo);
        if (a.labels[i] == 2) l = 1;
        if (b.labels[i] == 2) c += 1;
      }
      lhs[r][k] = l;
      rhs[r][k] = c / N;
    }
  });
  boost::math::normal nd;
  double z = boost::math::quantile(nd, 0.5 + level / 2);
  RezMcReport rep{replicas, level, {}, true};
  for (std::size_t k = 0; k < ys.size(); ++k) {
    double ml = 0, mr = 0, md = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
      ml += lhs[r][k];
      mr += rhs[r][k];
    }
    ml /= double(replicas);
    mr /= double(replicas);
    md = ml - mr;
    double var = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
      double d = lhs[r][k] - rhs[r][k] - md;
      var += d * d;
    }
    var /= double(std::max<std::size_t>(replicas - 1, 1));
    double hw = z * std::sqrt(var / double(replicas));
    bool ok = md <= hw;
    rep.points.push_back(RezEstimate{ys[k], ml, mr, md, hw, ok});
    rep.pass = rep.pass && ok;
  }
  return rep;
}

GeneratorMatrix labeled_second_class_generator(Site n_sites, std::size_t n_first, std::size_t N,
                                               double p, double q) {
  if (n_sites < 1 || n_first + N > static_cast<std::size_t>(n_sites))
    throw Error(ErrorCode::InvalidSpec, "too many particles for the window");
  LabelTuple ms;
  for (std::size_t i = 0; i < n_first; ++i) ms.push_back(1);
  for (std::size_t j = 0; j < N; ++j) ms.push_back(static_cast<Label>(2 + j));
  while (ms.size() < static_cast<std::size_t>(n_sites)) ms.push_back(kHole);
  std::sort(ms.begin(), ms.end());
  GeneratorMatrix g;
  g.window = SiteInterval{0, n_sites - 1};
  g.rates = JumpRates{p, q};
  do {
    g.states.push_back(ms);
    if (g.states.size() > kMaxExactStates) throw Error(ErrorCode::StateSpaceTooLarge, "labeled");
  } while (std::next_permutation(ms.begin(), ms.end()));
  g.build_index();
  auto n = static_cast<Eigen::Index>(g.states.size());
  g.Q = Eigen::MatrixXd::Zero(n, n);
  auto second = [](Label l) { return l >= 2 && l != kHole; };
  const auto m = static_cast<std::size_t>(n_sites);
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    LabelTuple s = g.states[i];
    auto add = [&](std::size_t a, std::size_t b, double rate) {
      if (rate == 0) return;
      std::swap(s[a], s[b]);
      g.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.index_of(s))) += rate;
      std::swap(s[a], s[b]);
    };
    for (std::size_t u = 0; u < m; ++u) {
      // first class particle steps left onto an empty site
      if (s[u] == 1 && u >= 1 && s[u - 1] == kHole) add(u, u - 1, p - q);
      // second class particle steps left onto an empty site
      if (second(s[u]) && u >= 1 && s[u - 1] == kHole) add(u, u - 1, p - q);
      // first class particle on the right of a second class one passes it leftwards
      if (second(s[u]) && u + 1 < m && s[u + 1] == 1) add(u, u + 1, p - q);
      // contents of every bond exchange at rate q, labels included
      if (u + 1 < m && s[u] != s[u + 1]) add(u, u + 1, q);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) g.Q(i, i) = -g.Q.row(i).sum();
  return g;
}

LabelTuple forget_labels_and_reflect(const LabelTuple& s) {
  LabelTuple out(s.rbegin(), s.rend());
  for (auto& l : out)
    if (l != kHole && l >= 2) l = 2;
  return out;
}

std::pair<Eigen::MatrixXd, double> lump(const Eigen::MatrixXd& Q,
                                        const std::vector<std::size_t>& block,
                                        std::size_t n_blocks) {
  auto nb = static_cast<Eigen::Index>(n_blocks);
  // per fine state, the rate into each block
  Eigen::MatrixXd into = Eigen::MatrixXd::Zero(Q.rows(), nb);
  for (Eigen::Index i = 0; i < Q.rows(); ++i)
    for (Eigen::Index j = 0; j < Q.cols(); ++j)
      into(i, static_cast<Eigen::Index>(block[static_cast<std::size_t>(j)])) += Q(i, j);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nb, nb);
  std::vector<bool> seen(n_blocks, false);
  double spread = 0;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    std::size_t b = block[static_cast<std::size_t>(i)];
    auto bi = static_cast<Eigen::Index>(b);
    if (!seen[b]) {
      L.row(bi) = into.row(i);
      seen[b] = true;
    } else {
      spread = std::max(spread, (L.row(bi) - into.row(i)).cwiseAbs().maxCoeff());
    }
  }
  return {L, spread};
}

}  // namespace asep
