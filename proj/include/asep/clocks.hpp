#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace asep {

using Site = std::int32_t;

struct SiteInterval {
  Site lo = 0;
  Site hi = -1;

  Site size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool empty() const { return hi < lo; }
  bool contains(Site s) const { return s >= lo && s <= hi; }
  bool contains(const SiteInterval& o) const { return o.empty() || (o.lo >= lo && o.hi <= hi); }
  bool operator==(const SiteInterval&) const = default;
};

struct JumpRates {
  double R = 1.0;
  double L = 0.0;
  double q() const { return L / R; }
  double total() const { return R + L; }
  bool operator==(const JumpRates&) const = default;
};

JumpRates make_rates(double R, double L);

enum class Direction : std::uint8_t { Left = 0, Right = 1 };

struct ArrowEvent {
  double time;
  Site site;
  Direction dir;
  bool operator==(const ArrowEvent&) const = default;
};

inline bool event_before(const ArrowEvent& a, const ArrowEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.site != b.site) return a.site < b.site;
  return a.dir < b.dir;
}

// Realized arrow field on sites x [0, horizon). Immutable once built.
class ClockWindow {
 public:
  ClockWindow() = default;

  const SiteInterval& sites() const { return sites_; }
  double horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }
  const JumpRates& rates() const { return rates_; }
  const std::vector<ArrowEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  friend ClockWindow sample_clock_window(const JumpRates&, SiteInterval, double, std::uint64_t);
  friend void resample_clock_window(ClockWindow&, const JumpRates&, SiteInterval, double, std::uint64_t);
  friend ClockWindow merge_clock_windows(const ClockWindow&, const ClockWindow&);

 private:
  SiteInterval sites_;
  double horizon_ = 0.0;
  std::uint64_t seed_ = 0;
  JumpRates rates_;
  std::vector<ArrowEvent> events_;
};

// key of the (site, direction) stream; independent of the window extent
std::uint64_t arrow_stream_key(std::uint64_t seed, Site site, Direction d);

ClockWindow sample_clock_window(const JumpRates& rates, SiteInterval sites, double horizon,
                                std::uint64_t seed);
// same as sample_clock_window but reuses the storage of `out`
void resample_clock_window(ClockWindow& out, const JumpRates& rates, SiteInterval sites,
                           double horizon, std::uint64_t seed);

std::span<const ArrowEvent> events_in_order(const ClockWindow& w);

// windows must be adjacent with equal seed, rates and horizon
ClockWindow merge_clock_windows(const ClockWindow& a, const ClockWindow& b);

// header only: the events are regenerated from the seed on load
void write_clock_window(std::ostream& os, const ClockWindow& w);
ClockWindow read_clock_window(std::istream& is);

}  // namespace asep
