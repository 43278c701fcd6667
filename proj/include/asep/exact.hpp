#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <vector>

#include "asep/clocks.hpp"
#include "asep/config.hpp"

namespace asep {

inline constexpr std::size_t kMaxExactSites = 10;
inline constexpr std::size_t kMaxExactStates = 6000;

using LabelTuple = std::vector<Label>;

struct GeneratorMatrix {
  SiteInterval window;
  JumpRates rates;
  std::vector<LabelTuple> states;  // lexicographic order
  Eigen::MatrixXd Q;

  std::size_t index_of(const LabelTuple& s) const;
  std::size_t index_of(const SpeciesConfig& c) const { return index_of(c.labels); }
  Eigen::VectorXd delta(const LabelTuple& s) const;
  // rebuild the state lookup after `states` is filled
  void build_index();

 private:
  std::map<LabelTuple, std::size_t> index_;
};

// all labelings of the window with classes 1..n_classes and holes
GeneratorMatrix exact_generator(SiteInterval window, int n_classes, const JumpRates& rates);
// the sector of rearrangements of one label multiset (class counts are conserved)
GeneratorMatrix exact_generator_sector(SiteInterval window, LabelTuple multiset,
                                       const JumpRates& rates);
// generator on an explicit state list, swap rule applied bond by bond
GeneratorMatrix build_generator(SiteInterval window, std::vector<LabelTuple> states,
                                const JumpRates& rates);

void check_stochastic(const Eigen::MatrixXd& Q);

// distribution at time t started from `initial` (a probability row vector)
Eigen::VectorXd exact_distribution(const Eigen::MatrixXd& Q, const Eigen::VectorXd& initial,
                                   double t);
inline Eigen::VectorXd exact_distribution(const GeneratorMatrix& g, const Eigen::VectorXd& initial,
                                          double t) {
  return exact_distribution(g.Q, initial, t);
}
// the full matrix exp(tQ), rows are distributions
Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& Q, double t);

// left null vector normalized to a probability vector
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Q);

// permutation p with state i -> state p[i] under site reflection plus a label map
std::vector<std::size_t> state_map(const GeneratorMatrix& from, const GeneratorMatrix& to,
                                   const std::function<Label(Label)>& relabel, bool reflect_sites);

}  // namespace asep
