#include "asep/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asep/error.hpp"
#include "asep/random.hpp"

namespace asep {

SpeciesConfig::SpeciesConfig(SiteInterval w, std::vector<Label> l)
    : window(w), labels(std::move(l)) {
  if (labels.size() != static_cast<std::size_t>(window.size()))
    throw Error(ErrorCode::WindowMismatch, "label count does not match window size");
}

std::vector<std::uint8_t> SpeciesConfig::occupation(Label k) const {
  std::vector<std::uint8_t> o(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) o[i] = labels[i] <= k ? 1 : 0;
  return o;
}

std::map<Label, std::size_t> SpeciesConfig::class_counts() const {
  std::map<Label, std::size_t> m;
  for (Label l : labels)
    if (l != kHole) ++m[l];
  return m;
}

std::string label_name(Label l) { return l == kHole ? std::string("H") : std::to_string(l); }

SpeciesConfig init_step(SiteInterval window, StepVariant v) {
  if (!window.contains(0)) throw Error(ErrorCode::WindowExcludesOrigin, "step data needs site 0");
  SpeciesConfig c(window, std::vector<Label>(static_cast<std::size_t>(window.size()), kHole));
  for (Site s = window.lo; s <= 0; ++s) c.at(s) = 1;
  if (v == StepVariant::SecondClassAtOrigin) c.at(0) = 2;
  return c;
}

SpeciesConfig init_bernoulli(SiteInterval window, double rho, double lambda, std::uint64_t seed) {
  if (!(rho >= 0 && rho <= 1 && lambda >= 0 && lambda <= 1))
    throw Error(ErrorCode::ProfileOutOfRange, "densities must lie in [0,1]");
  Stream rng(seed, 0x6265726eULL);
  SpeciesConfig c(window, std::vector<Label>(static_cast<std::size_t>(window.size()), kHole));
  for (Site s = window.lo; s <= window.hi; ++s) {
    double p = s <= 0 ? rho : lambda;
    if (rng.uniform() < p) c.at(s) = 1;
  }
  return c;
}

SpeciesConfig init_profile(SiteInterval window, const std::function<double(double)>& phi,
                           ProfileMode mode, std::uint64_t seed) {
  Stream rng(seed, 0x70726f66ULL);
  SpeciesConfig c(window, std::vector<Label>(static_cast<std::size_t>(window.size()), kHole));
  double span = window.hi > window.lo ? double(window.hi - window.lo) : 1.0;
  for (Site s = window.lo; s <= window.hi; ++s) {
    double p = mode == ProfileMode::Rescaled ? phi(double(s - window.lo) / span) : phi(double(s));
    if (!(p >= 0 && p <= 1))
      throw Error(ErrorCode::ProfileOutOfRange,
                  "profile value " + std::to_string(p) + " at site " + std::to_string(s));
    if (rng.uniform() < p) c.at(s) = 1;
  }
  return c;
}

SpeciesConfig init_speed_process(SiteInterval window) {
  std::vector<Label> l(static_cast<std::size_t>(window.size()));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<Label>(i + 1);
  return SpeciesConfig(window, std::move(l));
}

ParticleSystem::ParticleSystem(const SpeciesConfig& c, bool tag, std::optional<BoundaryWatch> w)
    : window(c.window), labels(c.labels), watch(w) {
  if (tag) {
    origin.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      origin[i] = labels[i] == kHole ? kNoOrigin : window.lo + static_cast<Site>(i);
  }
}

std::size_t advance(ParticleSystem& sys, const ClockWindow& clock, std::size_t cursor,
                    double until) {
  const auto& ev = clock.events();
  const std::size_t n = ev.size();
  while (cursor < n && ev[cursor].time < until) sys.apply(ev[cursor++]);
  return cursor;
}

const Checkpoint& Trajectory::at_time(double t) const {
  for (const auto& c : checkpoints)
    if (c.time == t) return c;
  throw Error(ErrorCode::InvalidSpec, "no checkpoint at time " + std::to_string(t));
}

std::vector<Site> Trajectory::tagged_path(Site origin_site) const {
  if (!tagged) throw Error(ErrorCode::MissingTags, "trajectory was evolved without tags");
  std::vector<Site> path;
  for (const auto& c : checkpoints) {
    auto it = std::find(c.origin.begin(), c.origin.end(), origin_site);
    if (it == c.origin.end()) throw Error(ErrorCode::MissingTags, "no particle with that origin");
    path.push_back(c.config.window.lo + static_cast<Site>(it - c.origin.begin()));
  }
  return path;
}

void check_evolve_inputs(const SpeciesConfig& config, const ClockWindow& clock, double until,
                         const std::vector<double>& checkpoints) {
  if (!clock.sites().contains(config.window))
    throw Error(ErrorCode::WindowMismatch, "clock does not cover the configuration window");
  if (until > clock.horizon())
    throw Error(ErrorCode::ClockTooShort, "evolution time exceeds the clock horizon");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw Error(ErrorCode::InvalidSpec, "checkpoint times must be sorted");
  for (double t : checkpoints)
    if (t < 0 || t > until) throw Error(ErrorCode::InvalidSpec, "checkpoint outside [0, until]");
}

Trajectory evolve(const SpeciesConfig& config, std::shared_ptr<const ClockWindow> clock,
                  double until, const std::vector<double>& checkpoint_times,
                  const EvolveOptions& opt) {
  check_evolve_inputs(config, *clock, until, checkpoint_times);
  if (opt.watch && !clock->sites().contains(config.window.lo - 1))
    throw Error(ErrorCode::WindowMismatch, "boundary watch needs the clock to cover lo-1");
  ParticleSystem sys(config, opt.tag, opt.watch);
  Trajectory traj;
  traj.initial = config;
  traj.clock = clock;
  traj.tagged = opt.tag;
  std::size_t cursor = 0;
  for (double t : checkpoint_times) {
    // the state at time t includes the events at times <= t
    cursor = advance(sys, *clock, cursor, std::nextafter(t, 1e300));
    traj.checkpoints.push_back(Checkpoint{t, sys.config(), sys.origin});
  }
  advance(sys, *clock, cursor, until);
  traj.boundary_conflicts = sys.conflicts;
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "time,site,label\n";
  for (const auto& c : traj.checkpoints)
    for (Site s = c.config.window.lo; s <= c.config.window.hi; ++s)
      os << c.time << ',' << s << ',' << label_name(c.config.at(s)) << '\n';
  return os.str();
}

std::string config_snapshot(const SpeciesConfig& c) {
  std::ostringstream os;
  for (Site s = c.window.lo; s <= c.window.hi; ++s) os << s << ',' << label_name(c.at(s)) << '\n';
  return os.str();
}

SpeciesConfig parse_config_snapshot(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<Label> labels;
  Site lo = 0, prev = 0;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::Io, "bad snapshot line: " + line);
    Site s = static_cast<Site>(std::stol(line.substr(0, comma)));
    std::string lab = line.substr(comma + 1);
    if (first) {
      lo = s;
      first = false;
    } else if (s != prev + 1) {
      throw Error(ErrorCode::Io, "snapshot sites must be consecutive");
    }
    prev = s;
    labels.push_back(lab == "H" ? kHole : static_cast<Label>(std::stoul(lab)));
  }
  if (labels.empty()) throw Error(ErrorCode::Io, "empty snapshot");
  return SpeciesConfig(SiteInterval{lo, prev}, std::move(labels));
}

SpeciesConfig reflect(const SpeciesConfig& c) {
  std::vector<Label> l(c.labels.rbegin(), c.labels.rend());
  return SpeciesConfig(c.window, std::move(l));
}

}  // namespace asep
