#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asep/clocks.hpp"

namespace asep {

// Class labels: 1 is the highest priority, Hole behaves as an infinite class.
using Label = std::uint32_t;
inline constexpr Label kHole = std::numeric_limits<Label>::max();
// origin of a site that holds no particle
inline constexpr Site kNoOrigin = std::numeric_limits<Site>::min();

struct SpeciesConfig {
  SiteInterval window;
  std::vector<Label> labels;

  SpeciesConfig() = default;
  SpeciesConfig(SiteInterval w, std::vector<Label> l);

  Label at(Site s) const { return labels[static_cast<std::size_t>(s - window.lo)]; }
  Label& at(Site s) { return labels[static_cast<std::size_t>(s - window.lo)]; }
  bool occupied(Site s, Label k) const { return at(s) <= k; }
  std::vector<std::uint8_t> occupation(Label k) const;
  std::map<Label, std::size_t> class_counts() const;
  bool operator==(const SpeciesConfig&) const = default;
};

std::string label_name(Label l);

enum class StepVariant {
  SecondClassAtOrigin,  // 1 on j <= -1, 2 at 0, holes on j > 0
  Pure,                 // 1 on j <= 0
};

SpeciesConfig init_step(SiteInterval window, StepVariant v = StepVariant::SecondClassAtOrigin);
SpeciesConfig init_bernoulli(SiteInterval window, double rho, double lambda, std::uint64_t seed);

enum class ProfileMode { Rescaled, Direct };
// occupation probability at site A+x is phi(x/(B-A)) (Rescaled) or phi(A+x) (Direct)
SpeciesConfig init_profile(SiteInterval window, const std::function<double(double)>& phi,
                           ProfileMode mode, std::uint64_t seed);

SpeciesConfig init_speed_process(SiteInterval window);
inline Label speed_process_label(SiteInterval window, Site n) {
  return static_cast<Label>(n - window.lo + 1);
}
inline Site speed_process_site(SiteInterval window, Label l) {
  return static_cast<Site>(l) + window.lo - 1;
}

// Mutable state used by the event loop. `origin` is empty when particles are not tagged.
struct BoundaryWatch {
  // a right arrow from lo-1 would push an outside particle in when label(lo) >= left
  Label left_threshold;
  // a right arrow out of hi would carry a particle out when label(hi) <= right
  Label right_threshold;
};

struct ParticleSystem {
  SiteInterval window;
  std::vector<Label> labels;
  std::vector<Site> origin;
  std::optional<BoundaryWatch> watch;
  std::size_t conflicts = 0;
  double first_conflict_time = -1;

  explicit ParticleSystem(const SpeciesConfig& c, bool tag = false,
                          std::optional<BoundaryWatch> w = std::nullopt);

  void apply(const ArrowEvent& e) {
    const Site lo = window.lo, hi = window.hi;
    Site s = e.site;
    if (e.dir == Direction::Right) {
      if (s >= lo && s < hi) {
        auto i = static_cast<std::size_t>(s - lo);
        if (labels[i] < labels[i + 1]) swap_at(i);
      } else if (watch) {
        if ((s == lo - 1 && labels.front() >= watch->left_threshold) ||
            (s == hi && labels.back() <= watch->right_threshold))
          note_conflict(e.time);
      }
    } else {
      if (s > lo && s <= hi) {
        auto i = static_cast<std::size_t>(s - lo);
        if (labels[i] < labels[i - 1]) swap_at(i - 1);
      }
    }
  }

  SpeciesConfig config() const { return SpeciesConfig(window, labels); }

 private:
  void swap_at(std::size_t i) {
    std::swap(labels[i], labels[i + 1]);
    if (!origin.empty()) std::swap(origin[i], origin[i + 1]);
  }
  void note_conflict(double t) {
    if (conflicts++ == 0) first_conflict_time = t;
  }
};

// Applies events with index >= cursor and time < until; returns the new cursor.
std::size_t advance(ParticleSystem& sys, const ClockWindow& clock, std::size_t cursor,
                    double until);

struct Checkpoint {
  double time;
  SpeciesConfig config;
  std::vector<Site> origin;  // empty unless tagged
};

struct Trajectory {
  SpeciesConfig initial;
  std::shared_ptr<const ClockWindow> clock;
  std::vector<Checkpoint> checkpoints;
  bool tagged = false;
  std::size_t boundary_conflicts = 0;

  const Checkpoint& at_time(double t) const;
  // positions over checkpoints of the particle that started at `origin_site`
  std::vector<Site> tagged_path(Site origin_site) const;
};

struct EvolveOptions {
  bool tag = false;
  std::optional<BoundaryWatch> watch;
};

void check_evolve_inputs(const SpeciesConfig& config, const ClockWindow& clock, double until,
                         const std::vector<double>& checkpoints);

Trajectory evolve(const SpeciesConfig& config, std::shared_ptr<const ClockWindow> clock,
                  double until, const std::vector<double>& checkpoint_times,
                  const EvolveOptions& opt = {});

// CSV: time,site,label
std::string trajectory_csv(const Trajectory& traj);
// one "site,label" line per site
std::string config_snapshot(const SpeciesConfig& c);
SpeciesConfig parse_config_snapshot(const std::string& text);

SpeciesConfig reflect(const SpeciesConfig& c);

}  // namespace asep
