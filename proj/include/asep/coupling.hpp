#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "asep/clocks.hpp"
#include "asep/config.hpp"
#include "asep/exact.hpp"

namespace asep {

struct CoupledRun {
  std::shared_ptr<const ClockWindow> clock;
  std::vector<std::pair<std::string, Trajectory>> members;
};

// observer is called after every applied event with the member states
using CoupleObserver = std::function<void(const ArrowEvent&, const std::vector<ParticleSystem>&)>;

CoupledRun couple(const std::vector<SpeciesConfig>& initials,
                  std::shared_ptr<const ClockWindow> clock, double until,
                  const std::vector<double>& checkpoints, const std::vector<std::string>& names = {},
                  const CoupleObserver& observer = nullptr, bool tag = false);

struct Violation {
  std::uint64_t seed = 0;
  double time = 0;
  Site site = 0;
  std::int64_t lhs = 0, rhs = 0;
};

struct CheckReport {
  bool pass = true;
  std::size_t checks = 0;
  std::optional<Violation> first;
  std::string describe() const;
};

// eta <= zeta as occupations (non-hole sites), at every checkpoint and site
CheckReport check_attractivity(const CoupledRun& run, std::pair<std::size_t, std::size_t> pair);

enum class MonotoneForm { Ordered, Close };
struct MonotoneSpec {
  MonotoneForm form;
  std::int64_t value;  // H for Ordered (h_xi + H >= h_zeta), K for Close (|h_xi - h_zeta| <= K)
};
// smallest H, and smallest K, for which the premise holds at time 0
std::int64_t minimal_shift(const SpeciesConfig& xi, const SpeciesConfig& zeta);
std::int64_t sup_distance(const SpeciesConfig& xi, const SpeciesConfig& zeta);

CheckReport check_monotonicity(const CoupledRun& run, std::pair<std::size_t, std::size_t> pair,
                               MonotoneSpec spec);

// Same relations checked after every single event rather than at checkpoints.
CheckReport attractivity_pathwise(const SpeciesConfig& eta, const SpeciesConfig& zeta,
                                  const ClockWindow& clock, double until);
CheckReport monotonicity_pathwise(const SpeciesConfig& xi, const SpeciesConfig& zeta,
                                  const ClockWindow& clock, double until, MonotoneSpec spec);
// first time (or -1) at which the occupations differ somewhere on `inner`
double first_disagreement(const SpeciesConfig& xi, const SpeciesConfig& zeta,
                          const ClockWindow& clock, double until, SiteInterval inner);

struct SecondClassSet {
  SpeciesConfig base;               // eta, first class only
  std::vector<std::uint8_t> alpha;  // per site of the window
  std::vector<Site> positions;      // strictly decreasing
};
SecondClassSet second_class_decompose(const SpeciesConfig& eta, const SpeciesConfig& zeta);
SecondClassSet second_class_decompose(const CoupledRun& run,
                                      std::pair<std::size_t, std::size_t> pair,
                                      std::size_t checkpoint);

// first class particles from eta plus label 2 at every site of alpha
SpeciesConfig with_second_class(const SpeciesConfig& eta, const std::vector<Site>& alpha);
void check_admissible(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha);

struct RezPoint {
  Site y;
  double lhs, rhs;
};

// Exact two-sided comparison on a tiny window for every y of the window.
class RezOracle {
 public:
  explicit RezOracle(JumpRates rates) : rates_(rates) {}
  std::vector<RezPoint> curve(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha,
                              double t);

 private:
  struct Entry {
    GeneratorMatrix gen;
    Eigen::MatrixXd P;
  };
  const Entry& entry(SiteInterval w, const LabelTuple& multiset, double t);
  JumpRates rates_;
  std::map<std::tuple<Site, Site, LabelTuple, double>, Entry> cache_;
};

RezPoint rez_bound_exact(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha, Site y,
                         double t, const JumpRates& rates);

struct RezEstimate {
  Site y;
  double lhs, rhs;
  double diff_mean, diff_halfwidth;  // paired difference lhs - rhs and its CI half width
  bool pass;
};
struct RezMcReport {
  std::size_t replicas;
  double level;
  std::vector<RezEstimate> points;
  bool pass;
};
RezMcReport rez_bound_mc(const SpeciesConfig& eta, Site x0, const std::vector<Site>& alpha,
                         const std::vector<Site>& ys, double t, const JumpRates& rates,
                         std::size_t replicas, std::uint64_t seed, double level = 0.99);

// Labeled process of the reversed-orientation generator: first class particles (1), N
// labeled second class particles (2..N+1), holes; left drift p, right rate q.
GeneratorMatrix labeled_second_class_generator(Site n_sites, std::size_t n_first, std::size_t N,
                                               double p, double q);
// labeled state -> unlabeled state in the forward orientation (reflected, labels 2.. -> 2)
LabelTuple forget_labels_and_reflect(const LabelTuple& s);

// Aggregates Q over blocks; returns the lumped matrix and the largest within-block spread.
std::pair<Eigen::MatrixXd, double> lump(const Eigen::MatrixXd& Q,
                                        const std::vector<std::size_t>& block,
                                        std::size_t n_blocks);

inline Site reflect_site(SiteInterval w, Site x) { return w.lo + w.hi - x; }

}  // namespace asep
