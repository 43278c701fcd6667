#include "asep/lab.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asep/error.hpp"
#include "asep/stats.hpp"

namespace asep::lab {

namespace {

const std::map<Kind, std::string>& kind_names() {
  static const std::map<Kind, std::string> m = {
      {Kind::Simulate, "simulate"},         {Kind::Couple, "couple"},
      {Kind::SpeedLaw, "speed-law"},        {Kind::SpeedProcess, "speed-process"},
      {Kind::Concentration, "concentration"}, {Kind::Perturbation, "perturbation"},
      {Kind::QLaplace, "qlaplace"},         {Kind::MinParticle, "min-particle"},
      {Kind::RezSweep, "rez-check"},        {Kind::Schedule, "schedule"},
  };
  return m;
}

const std::map<InitialKind, std::string>& initial_names() {
  static const std::map<InitialKind, std::string> m = {{InitialKind::Step, "step"},
                                                       {InitialKind::Bernoulli, "bernoulli"},
                                                       {InitialKind::UpsilonEps, "upsilon-eps"},
                                                       {InitialKind::PhiEpsBeta, "phi-eps-beta"}};
  return m;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSpec, "bad number for " + key + ": " + v);
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string kind_name(Kind k) { return kind_names().at(k); }

Kind parse_kind(const std::string& s) {
  for (auto& [k, n] : kind_names())
    if (n == s) return k;
  throw Error(ErrorCode::InvalidSpec, "unknown kind " + s);
}

std::string initial_name(InitialKind k) { return initial_names().at(k); }

ExperimentSpec default_spec(Kind k) {
  ExperimentSpec s;
  s.kind = k;
  switch (k) {
    case Kind::Simulate:
      s.times = {10};
      s.replicas = 1;
      break;
    case Kind::Couple:
      s.times = {50};
      s.replicas = 100;
      break;
    case Kind::SpeedLaw:
      s.times = {125, 250, 500, 1000};
      s.replicas = 2000;
      break;
    case Kind::SpeedProcess:
      s.times = {500};
      s.replicas = 1000;
      s.ks_tol = 0.06;
      break;
    case Kind::Concentration:
      s.times = {250, 500, 1000, 2000};
      s.replicas = 500;
      break;
    case Kind::Perturbation:
      s.replicas = 200;
      s.freq_min = 0.9;
      s.times = {};
      break;
    case Kind::QLaplace:
      s.rates = {1.5, 0.5};
      s.times = {20};
      s.x = 2;
      s.replicas = 100000;
      break;
    case Kind::MinParticle:
      s.times = {10};
      s.x = 0;
      s.replicas = 100000;
      break;
    case Kind::RezSweep:
      s.rates = {1.5, 0.5};
      s.times = {0.5, 1, 2};
      s.replicas = 2000;
      break;
    case Kind::Schedule:
      s.times = {};
      s.replicas = 1;
      break;
  }
  return s;
}

ExperimentSpec parse_spec(const std::string& text, ExperimentSpec s) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    auto d = [&] { return to_double(key, v); };
    auto i = [&] { return static_cast<int>(d()); };
    if (key == "kind") {
      Kind k = parse_kind(v);
      if (k != s.kind) s = default_spec(k);
    } else if (key == "R") s.rates.R = d();
    else if (key == "L") s.rates.L = d();
    else if (key == "times") s.times = to_list(key, v);
    else if (key == "replicas") s.replicas = static_cast<std::size_t>(d());
    else if (key == "seed") {
      try {
        std::size_t pos = 0;
        s.base_seed = std::stoull(v, &pos);
        if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidSpec, "bad seed: " + v);
      }
    }
    else if (key == "threads") s.threads = static_cast<unsigned>(d());
    else if (key == "out") s.out = v;
    else if (key == "initial") {
      bool found = false;
      for (auto& [k, n] : initial_names())
        if (n == v) s.initial = k, found = true;
      if (!found) throw Error(ErrorCode::InvalidSpec, "unknown initial " + v);
    } else if (key == "rho") s.rho = d();
    else if (key == "lambda") s.lambda = d();
    else if (key == "eps") s.eps = d();
    else if (key == "beta") s.beta = d();
    else if (key == "delta") s.delta = d();
    else if (key == "kappa") s.kappa = d();
    else if (key == "gammas") s.gammas = to_list(key, v);
    else if (key == "S") s.S = d();
    else if (key == "zetas") s.zetas = to_list(key, v);
    else if (key == "x") s.x = i();
    else if (key == "core") s.core = i();
    else if (key == "pair_gap") s.pair_gap = i();
    else if (key == "window_margin") s.window_margin = i();
    else if (key == "level") s.level = d();
    else if (key == "ks_tol") s.ks_tol = d();
    else if (key == "p_min") s.p_min = d();
    else if (key == "exponent_lo") s.exponent_lo = d();
    else if (key == "exponent_hi") s.exponent_hi = d();
    else if (key == "freq_min") s.freq_min = d();
    else if (key == "sup_tol") s.sup_tol = d();
    else if (key == "S0") s.S0 = d();
    else if (key == "count") s.count = i();
    else if (key == "rez_min") s.rez_min = i();
    else if (key == "rez_max") s.rez_max = i();
    else if (key == "rez_n") s.rez_n = i();
    else if (key == "mc_sites") s.mc_sites = i();
    else if (key == "mc_n") s.mc_n = i();
    else if (key == "mc_t") s.mc_t = d();
    else throw Error(ErrorCode::InvalidSpec, "unknown key " + key);
  }
  return s;
}

ExperimentSpec parse_spec(const std::string& text) {
  // the kind line decides the defaults, wherever it appears
  ExperimentSpec probe = parse_spec(text, ExperimentSpec{});
  return parse_spec(text, default_spec(probe.kind));
}

std::string spec_text(const ExperimentSpec& s) {
  std::ostringstream os;
  os << "kind = " << kind_name(s.kind) << '\n'
     << "R = " << num(s.rates.R) << "\nL = " << num(s.rates.L) << '\n'
     << "times = " << list(s.times) << '\n'
     << "replicas = " << s.replicas << "\nseed = " << s.base_seed << '\n'
     << "initial = " << initial_name(s.initial) << '\n'
     << "rho = " << num(s.rho) << "\nlambda = " << num(s.lambda) << "\neps = " << num(s.eps)
     << "\nbeta = " << num(s.beta) << "\ndelta = " << num(s.delta) << "\nkappa = " << num(s.kappa)
     << "\ngammas = " << list(s.gammas) << "\nS = " << num(s.S) << "\nzetas = " << list(s.zetas)
     << "\nx = " << s.x << "\ncore = " << s.core << "\npair_gap = " << s.pair_gap
     << "\nwindow_margin = " << s.window_margin << "\nlevel = " << num(s.level)
     << "\nks_tol = " << num(s.ks_tol) << "\np_min = " << num(s.p_min)
     << "\nexponent_lo = " << num(s.exponent_lo) << "\nexponent_hi = " << num(s.exponent_hi)
     << "\nfreq_min = " << num(s.freq_min) << "\nsup_tol = " << num(s.sup_tol)
     << "\nS0 = " << num(s.S0) << "\ncount = " << s.count << "\nrez_min = " << s.rez_min
     << "\nrez_max = " << s.rez_max << "\nrez_n = " << s.rez_n << "\nmc_sites = " << s.mc_sites
     << "\nmc_n = " << s.mc_n << "\nmc_t = " << num(s.mc_t) << '\n';
  // threads and out do not change results, so they stay out of the hash
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate(const ExperimentSpec& s) {
  make_rates(s.rates.R, s.rates.L);
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
  if (s.replicas < 1) bad("replicas must be >= 1");
  if (!std::is_sorted(s.times.begin(), s.times.end())) bad("times must be sorted");
  for (double t : s.times)
    if (!(t > 0)) bad("checkpoint times must be > 0; velocities are undefined at t = 0");
  bool needs_times = s.kind != Kind::Perturbation && s.kind != Kind::Schedule;
  if (needs_times && s.times.empty()) bad("times must not be empty");
  if (!(s.level > 0 && s.level < 1)) bad("level must lie in (0,1)");
  switch (s.kind) {
    case Kind::Concentration:
      if (s.initial == InitialKind::Bernoulli && !(s.lambda <= s.rho))
        bad("(rho;lambda) data needs lambda <= rho");
      if (!(s.eps > 0 && s.eps < 1)) bad("eps must lie in (0,1)");
      if (s.initial == InitialKind::UpsilonEps || s.initial == InitialKind::PhiEpsBeta) {
        if (!(s.rho >= s.eps && s.rho <= 1 - s.eps)) bad("rho must lie in [eps, 1-eps]");
        if (!(s.delta > 0)) bad("delta must be > 0");
      }
      break;
    case Kind::SpeedProcess:
      if (s.core < 1 || s.pair_gap < 1 || s.pair_gap > s.core) bad("need 1 <= pair_gap <= core");
      break;
    case Kind::Perturbation:
      if (!(s.S > 2)) bad("S must exceed 2");
      for (double g : s.gammas)
        if (!(g > 0 && g < 0.5)) bad("gamma must lie in (0, 1/2)");
      if (!(s.eps > 0 && s.eps < 0.5)) bad("eps must lie in (0, 1/2)");
      break;
    case Kind::QLaplace:
      if (s.times.back() > 30) bad("q-Laplace runs need T <= 30");
      if (s.x < 0) bad("x must be >= 0");
      break;
    case Kind::MinParticle:
      if (s.rates.L != 0) bad("the minimum-particle law is for L = 0");
      if (s.x < 0) bad("x must be >= 0");
      break;
    case Kind::Schedule:
      if (!(s.S0 >= 2)) bad("S0 must be >= 2");
      break;
    default:
      break;
  }
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Skipped: return "SKIPPED";
    case Verdict::Info: return "INFO";
  }
  return "?";
}

int exit_code(const Result& r) {
  for (const auto& c : r.checks)
    if (c.verdict == Verdict::Fail) return 1;
  return 0;
}

std::string report(const Result& r) {
  std::ostringstream os;
  os << "experiment " << kind_name(r.kind) << '\n';
  for (const auto& c : r.checks) {
    os << verdict_name(c.verdict) << "  " << c.name << ": " << stats::fmt(c.statistic);
    if (!c.relation.empty()) os << ' ' << c.relation << ' ' << stats::fmt(c.threshold);
    os << "  (n=" << c.n;
    if (!c.method.empty()) os << ", " << c.method;
    if (c.level > 0) os << ", level " << stats::fmt(c.level);
    os << ')';
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  for (const auto& [k, v] : r.summary) os << "  " << k << " = " << v << '\n';
  return os.str();
}

std::string RunManifest::text() const {
  std::ostringstream os;
  os << "spec_hash = " << spec_hash << "\nbase_seed = " << base_seed << "\nreplicas = " << replicas
     << "\nreplica_seed = mix(base_seed, replica index)\nversion = " << version << '\n';
  for (const auto& [f, h] : files) os << "file." << f << " = " << h << '\n';
  for (const auto& [k, v] : summary) os << "summary." << k << " = " << v << '\n';
  return os.str();
}

RunManifest make_manifest(const ExperimentSpec& spec, const Result& r) {
  RunManifest m;
  m.spec_hash = hex(fnv1a(spec_text(spec)));
  m.base_seed = spec.base_seed;
  m.replicas = spec.replicas;
  m.version = kVersion;
  for (const auto& t : r.tables) m.files.emplace_back(t.name, hex(fnv1a(t.csv)));
  for (const auto& c : r.checks) m.summary.emplace_back(c.name, verdict_name(c.verdict) + " " + stats::fmt(c.statistic));
  for (const auto& kv : r.summary) m.summary.push_back(kv);
  return m;
}

RunManifest write_outputs(const ExperimentSpec& spec, const Result& r) {
  RunManifest m = make_manifest(spec, r);
  if (spec.out.empty()) return m;
  namespace fs = std::filesystem;
  fs::path dir(spec.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + spec.out);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    f << content;
  };
  for (const auto& t : r.tables) put(t.name, t.csv);
  put("spec.txt", spec_text(spec));
  put("report.txt", report(r));
  put("manifest.txt", m.text());
  return m;
}

Site step_half_width(const JumpRates& rates, double t) {
  return static_cast<Site>(std::ceil((rates.R - rates.L) * t + 8 * std::sqrt(rates.total() * t) + 30));
}

SiteInterval light_cone_window(const JumpRates& rates, double t, SiteInterval region, int margin) {
  auto w = static_cast<Site>(std::ceil(4 * rates.R * t)) + margin;
  return {region.lo - w, region.hi + w};
}

CertifiedRun certified_evolve(const std::function<SpeciesConfig(SiteInterval)>& make,
                              SiteInterval window,
                              const std::function<BoundaryWatch(SiteInterval)>& watch,
                              const JumpRates& rates, const std::vector<double>& checkpoints,
                              std::uint64_t seed, bool tag) {
  if (checkpoints.empty()) throw Error(ErrorCode::InvalidSpec, "no checkpoints");
  const double until = checkpoints.back();
  CertifiedRun out;
  for (;;) {
    auto clock = std::make_shared<ClockWindow>(
        sample_clock_window(rates, {window.lo - 1, window.hi}, until, seed));
    EvolveOptions opt;
    opt.tag = tag;
    opt.watch = watch(window);
    out.traj = evolve(make(window), clock, until, checkpoints, opt);
    out.traj.clock.reset();  // the arrow field is large and can be regenerated from the seed
    if (out.traj.boundary_conflicts == 0) return out;
    // arrows are keyed by site, so the wider run reuses the same field
    Site half = window.size() / 2 + 1;
    window = {window.lo - half, window.hi + half};
    ++out.doublings;
  }
}

std::vector<ScheduleEntry> schedule_times(double S0, int count) {
  if (!(S0 >= 2)) throw Error(ErrorCode::ParameterOutOfRange, "S0 must be >= 2");
  std::vector<ScheduleEntry> out;
  double S = S0;
  for (int m = 0; m < count; ++m) {
    double T = S / std::log(S);
    out.push_back({S, T});
    S += T;
  }
  return out;
}

double max_interval_deviation(const SpeciesConfig& c, Label k, Site a, Site b,
                              const std::function<double(double)>& mass_from_a) {
  if (!c.window.contains(SiteInterval{a, b}))
    throw Error(ErrorCode::OutOfRegion, "deviation range outside the window");
  double cnt = 0, lo = 0, hi = 0;
  for (Site x = a + 1; x <= b; ++x) {
    if (c.occupied(x, k)) cnt += 1;
    double phi = cnt - mass_from_a(x);
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  return hi - lo;
}

}  // namespace asep::lab
