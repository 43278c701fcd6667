#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asep/config.hpp"

namespace asep {

struct HeightField {
  double time = 0;
  SiteInterval region;  // h is defined for x in region
  std::vector<std::int64_t> values;

  std::int64_t at(Site x) const;
};

// h(0)=0, h(x) = -sum_{1..x} xi for x >= 1, h(x) = sum_{x+1..0} xi for x <= -1,
// with xi the indicator of class <= k
HeightField height_initial(const SpeciesConfig& c, Label k,
                           std::optional<SiteInterval> region = std::nullopt);

// red/blue counting: blue particles started at <= 0, red ones at > 0;
// h_t(x) = #blue right of x - #red at or left of x
HeightField height_tagged(const SpeciesConfig& c, const std::vector<Site>& origin, Label k,
                          double time, std::optional<SiteInterval> region = std::nullopt);

HeightField height_at_time(const Trajectory& traj, double t, Label k,
                           std::optional<SiteInterval> region = std::nullopt);

// same values for a closed system without tags: h_t(x) = N_{>x}(t) - #(initially > 0)
HeightField height_by_count(const SpeciesConfig& c, std::int64_t initially_right, Label k,
                            double time, std::optional<SiteInterval> region = std::nullopt);
std::int64_t count_right_of_origin(const SpeciesConfig& c, Label k);

// h(X) - h(Y) = number of class <= k particles on [X+1, Y]
std::int64_t height_diff(const HeightField& h, Site X, Site Y);

// linear interpolation between integer sites
double height_interp(const HeightField& h, double x);

// time,x,h
std::string height_csv(const std::vector<HeightField>& fields);

}  // namespace asep
