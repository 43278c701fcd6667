#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asep/clocks.hpp"
#include "asep/config.hpp"

namespace asep::lab {

enum class Kind {
  Simulate,
  Couple,
  SpeedLaw,
  SpeedProcess,
  Concentration,
  Perturbation,
  QLaplace,
  MinParticle,
  RezSweep,
  Schedule,
};

enum class InitialKind { Step, Bernoulli, UpsilonEps, PhiEpsBeta };

std::string kind_name(Kind k);
Kind parse_kind(const std::string& s);
std::string initial_name(InitialKind k);

struct ExperimentSpec {
  Kind kind = Kind::SpeedLaw;
  JumpRates rates{1.0, 0.0};
  std::vector<double> times{1000};  // checkpoints, the last one is the horizon
  std::size_t replicas = 100;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  std::string out;       // output directory, empty for none

  InitialKind initial = InitialKind::Step;
  double rho = 0.5, lambda = 0.0;
  double eps = 0.2;
  double beta = 0.1;    // flat level of the Phi profile
  double delta = 0.05;  // S = T / delta^2 for the linear profiles
  double kappa = 30;
  std::vector<double> gammas{0.01};
  double S = 2000;  // perturbation time
  std::vector<double> zetas{0.1, 1, 10};
  int x = 2;
  int core = 5;  // speed process classes n in [-core, core]
  int pair_gap = 5;
  int window_margin = 20;  // light-cone margin
  double level = 0.99;

  // acceptance thresholds
  double ks_tol = 0.05;
  double p_min = 0.01;
  double exponent_lo = 0.25, exponent_hi = 0.45;
  double freq_min = 0.95;
  double sup_tol = 0.01;

  // schedule
  double S0 = 2;
  int count = 200;

  // rez sweep: exhaustive windows of rez_min..rez_max sites with up to rez_n second class
  int rez_min = 5, rez_max = 7, rez_n = 3;
  int mc_sites = 200, mc_n = 20;
  double mc_t = 20;
};

inline constexpr const char* kVersion = "0.1.0";

ExperimentSpec default_spec(Kind k);
// key = value lines, '#' comments; unknown keys are errors
ExperimentSpec parse_spec(const std::string& text, ExperimentSpec base);
ExperimentSpec parse_spec(const std::string& text);
std::string spec_text(const ExperimentSpec& s);
std::uint64_t fnv1a(const std::string& s);
void validate(const ExperimentSpec& s);

enum class Verdict { Pass, Fail, Skipped, Info };
std::string verdict_name(Verdict v);

struct Check {
  std::string name;
  Verdict verdict = Verdict::Info;
  double statistic = 0;
  std::string relation;  // e.g. "<=", ">=", "in"
  double threshold = 0;
  std::size_t n = 0;
  std::string method;
  double level = 0;
  std::string detail;
};

struct Table {
  std::string name;  // file name
  std::string csv;
};

struct Result {
  Kind kind;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> summary;
};

int exit_code(const Result& r);
std::string report(const Result& r);

struct RunManifest {
  std::string spec_hash;
  std::uint64_t base_seed;
  std::size_t replicas;
  std::string version;
  std::vector<std::pair<std::string, std::string>> files;  // name, content hash
  std::vector<std::pair<std::string, std::string>> summary;
  std::string text() const;
};

RunManifest make_manifest(const ExperimentSpec& spec, const Result& r);
// writes tables, report.txt and manifest.txt into spec.out
RunManifest write_outputs(const ExperimentSpec& spec, const Result& r);

// ---- windows

// half width of a step-data window whose boundary is rarely touched by time t
Site step_half_width(const JumpRates& rates, double t);
// region widened by the finite speed allowance 4Rt plus a margin
SiteInterval light_cone_window(const JumpRates& rates, double t, SiteInterval region, int margin);

// Evolves make(window) on a clock covering [lo-1, hi]; whenever the boundary watch fires the
// window is doubled and the run repeated on the same arrow field.
struct CertifiedRun {
  Trajectory traj;
  int doublings = 0;
};
CertifiedRun certified_evolve(const std::function<SpeciesConfig(SiteInterval)>& make,
                              SiteInterval window,
                              const std::function<BoundaryWatch(SiteInterval)>& watch,
                              const JumpRates& rates, const std::vector<double>& checkpoints,
                              std::uint64_t seed, bool tag = false);

// ---- experiments

Result run_speed_law(const ExperimentSpec& s);
Result run_speed_process(const ExperimentSpec& s);
Result run_concentration(const ExperimentSpec& s);
Result run_perturbation(const ExperimentSpec& s);
Result run_qlaplace_identity(const ExperimentSpec& s);
Result run_min_particle_check(const ExperimentSpec& s);
Result run_rez_sweep(const ExperimentSpec& s);
Result run_schedule(const ExperimentSpec& s);
Result run_simulate(const ExperimentSpec& s);
Result run_couple(const ExperimentSpec& s);
Result run(const ExperimentSpec& s);

struct ScheduleEntry {
  double S, T;
};
// S_{m+1} = S_m + T(S_m), T(S) = S / log S
std::vector<ScheduleEntry> schedule_times(double S0, int count);

// max over X < Y in [a, b] of |#particles in [X+1, Y] - mass(X, Y)|, with mass(a, x) given
double max_interval_deviation(const SpeciesConfig& c, Label k, Site a, Site b,
                              const std::function<double(double)>& mass_from_a);

}  // namespace asep::lab
