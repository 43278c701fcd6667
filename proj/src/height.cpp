#include "asep/height.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asep/error.hpp"

namespace asep {

std::int64_t HeightField::at(Site x) const {
  if (!region.contains(x))
    throw Error(ErrorCode::OutOfRegion, "height queried at " + std::to_string(x) +
                                            " outside [" + std::to_string(region.lo) + "," +
                                            std::to_string(region.hi) + "]");
  return values[static_cast<std::size_t>(x - region.lo)];
}

namespace {

SiteInterval pick_region(const SpeciesConfig& c, std::optional<SiteInterval> region) {
  if (!region) return c.window;
  if (!c.window.contains(*region))
    throw Error(ErrorCode::OutOfRegion, "height region exceeds the configuration window");
  return *region;
}

HeightField restrict(std::vector<std::int64_t> full, SiteInterval window, SiteInterval region,
                     double time) {
  HeightField h;
  h.time = time;
  h.region = region;
  h.values.assign(full.begin() + (region.lo - window.lo), full.begin() + (region.hi - window.lo + 1));
  return h;
}

}  // namespace

HeightField height_initial(const SpeciesConfig& c, Label k, std::optional<SiteInterval> region) {
  SiteInterval r = pick_region(c, region);
  const SiteInterval w = c.window;
  // prefix[i] = number of class <= k particles on [lo, lo+i-1]
  std::vector<std::int64_t> prefix(c.labels.size() + 1, 0);
  for (std::size_t i = 0; i < c.labels.size(); ++i) prefix[i + 1] = prefix[i] + (c.labels[i] <= k);
  auto sum = [&](Site a, Site b) -> std::int64_t {
    a = std::max(a, w.lo);
    b = std::min(b, w.hi);
    if (a > b) return 0;
    return prefix[static_cast<std::size_t>(b - w.lo + 1)] - prefix[static_cast<std::size_t>(a - w.lo)];
  };
  std::vector<std::int64_t> full(c.labels.size());
  for (Site x = w.lo; x <= w.hi; ++x)
    full[static_cast<std::size_t>(x - w.lo)] = x >= 0 ? -sum(1, x) : sum(x + 1, 0);
  return restrict(std::move(full), w, r, 0.0);
}

HeightField height_tagged(const SpeciesConfig& c, const std::vector<Site>& origin, Label k,
                          double time, std::optional<SiteInterval> region) {
  if (origin.size() != c.labels.size())
    throw Error(ErrorCode::MissingTags, "particle origins are not recorded");
  SiteInterval r = pick_region(c, region);
  const SiteInterval w = c.window;
  std::int64_t blue_right = 0;
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    if (c.labels[i] <= k && origin[i] <= 0) ++blue_right;
  std::int64_t red_left = 0;
  std::vector<std::int64_t> full(c.labels.size());
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (c.labels[i] <= k) {
      if (origin[i] == kNoOrigin) throw Error(ErrorCode::MissingTags, "untagged particle");
      if (origin[i] <= 0)
        --blue_right;
      else
        ++red_left;
    }
    full[i] = blue_right - red_left;
  }
  return restrict(std::move(full), w, r, time);
}

HeightField height_at_time(const Trajectory& traj, double t, Label k,
                           std::optional<SiteInterval> region) {
  if (!traj.tagged) throw Error(ErrorCode::MissingTags, "trajectory was evolved without tags");
  const Checkpoint& cp = traj.at_time(t);
  return height_tagged(cp.config, cp.origin, k, t, region);
}

std::int64_t count_right_of_origin(const SpeciesConfig& c, Label k) {
  std::int64_t n = 0;
  for (Site s = std::max<Site>(c.window.lo, 1); s <= c.window.hi; ++s)
    if (c.at(s) <= k) ++n;
  return n;
}

HeightField height_by_count(const SpeciesConfig& c, std::int64_t initially_right, Label k,
                            double time, std::optional<SiteInterval> region) {
  SiteInterval r = pick_region(c, region);
  std::vector<std::int64_t> full(c.labels.size());
  std::int64_t right = 0;
  for (Label l : c.labels)
    if (l <= k) ++right;
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (c.labels[i] <= k) --right;
    full[i] = right - initially_right;
  }
  return restrict(std::move(full), c.window, r, time);
}

std::int64_t height_diff(const HeightField& h, Site X, Site Y) {
  if (X > Y) throw Error(ErrorCode::InvalidSpec, "height_diff needs X <= Y");
  return h.at(X) - h.at(Y);
}

double height_interp(const HeightField& h, double x) {
  double f = std::floor(x);
  auto a = static_cast<Site>(f);
  if (f == x) return double(h.at(a));
  double w = x - f;
  return (1 - w) * double(h.at(a)) + w * double(h.at(a + 1));
}

std::string height_csv(const std::vector<HeightField>& fields) {
  std::ostringstream os;
  os << "time,x,h\n";
  for (const auto& h : fields)
    for (Site x = h.region.lo; x <= h.region.hi; ++x) os << h.time << ',' << x << ',' << h.at(x) << '\n';
  return os.str();
}

}  // namespace asep
