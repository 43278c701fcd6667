#include "asep/exact.hpp"

#include <algorithm>
#include <cmath>

#include "asep/error.hpp"

namespace asep {

std::size_t GeneratorMatrix::index_of(const LabelTuple& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) throw Error(ErrorCode::InvalidSpec, "state not in the state space");
  return it->second;
}

void GeneratorMatrix::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < states.size(); ++i) index_[states[i]] = i;
}

Eigen::VectorXd GeneratorMatrix::delta(const LabelTuple& s) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states.size()));
  v(static_cast<Eigen::Index>(index_of(s))) = 1.0;
  return v;
}

GeneratorMatrix build_generator(SiteInterval window, std::vector<LabelTuple> states,
                                const JumpRates& rates) {
  if (static_cast<std::size_t>(window.size()) > kMaxExactSites || states.size() > kMaxExactStates)
    throw Error(ErrorCode::StateSpaceTooLarge,
                std::to_string(states.size()) + " states on " + std::to_string(window.size()) +
                    " sites");
  std::sort(states.begin(), states.end());
  GeneratorMatrix g;
  g.window = window;
  g.rates = rates;
  g.states = std::move(states);
  for (const auto& s : g.states)
    if (s.size() != static_cast<std::size_t>(window.size()))
      throw Error(ErrorCode::WindowMismatch, "state length differs from the window size");
  g.build_index();
  auto n = static_cast<Eigen::Index>(g.states.size());
  g.Q = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    LabelTuple s = g.states[i];
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      Label a = s[k], b = s[k + 1];
      if (a == b) continue;
      double rate = a < b ? rates.R : rates.L;
      if (rate == 0.0) continue;
      std::swap(s[k], s[k + 1]);
      g.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.index_of(s))) += rate;
      std::swap(s[k], s[k + 1]);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) g.Q(i, i) = -g.Q.row(i).sum();
  return g;
}

GeneratorMatrix exact_generator(SiteInterval window, int n_classes, const JumpRates& rates) {
  auto m = static_cast<std::size_t>(window.size());
  if (m > kMaxExactSites) throw Error(ErrorCode::StateSpaceTooLarge, "window too large");
  if (n_classes < 0) throw Error(ErrorCode::InvalidSpec, "negative class count");
  double count = std::pow(double(n_classes + 1), double(m));
  if (count > double(kMaxExactStates))
    throw Error(ErrorCode::StateSpaceTooLarge, std::to_string(count) + " states");
  std::vector<Label> alphabet;
  for (int c = 1; c <= n_classes; ++c) alphabet.push_back(static_cast<Label>(c));
  alphabet.push_back(kHole);
  std::vector<LabelTuple> states;
  std::vector<std::size_t> digit(m, 0);
  while (true) {
    LabelTuple s(m);
    for (std::size_t k = 0; k < m; ++k) s[k] = alphabet[digit[k]];
    states.push_back(std::move(s));
    std::size_t k = m;
    while (k > 0 && ++digit[k - 1] == alphabet.size()) digit[--k] = 0;
    if (k == 0) break;
  }
  return build_generator(window, std::move(states), rates);
}

GeneratorMatrix exact_generator_sector(SiteInterval window, LabelTuple multiset,
                                       const JumpRates& rates) {
  if (multiset.size() != static_cast<std::size_t>(window.size()))
    throw Error(ErrorCode::WindowMismatch, "multiset size differs from the window size");
  if (multiset.size() > kMaxExactSites) throw Error(ErrorCode::StateSpaceTooLarge, "window too large");
  std::sort(multiset.begin(), multiset.end());
  // multinomial count before enumerating
  double count = std::tgamma(double(multiset.size()) + 1);
  for (std::size_t i = 0; i < multiset.size();) {
    std::size_t j = i;
    while (j < multiset.size() && multiset[j] == multiset[i]) ++j;
    count /= std::tgamma(double(j - i) + 1);
    i = j;
  }
  if (count > double(kMaxExactStates))
    throw Error(ErrorCode::StateSpaceTooLarge, std::to_string(count) + " states");
  std::vector<LabelTuple> states;
  do {
    states.push_back(multiset);
  } while (std::next_permutation(multiset.begin(), multiset.end()));
  return build_generator(window, std::move(states), rates);
}

void check_stochastic(const Eigen::MatrixXd& Q) {
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    double sum = 0;
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
      if (i != j && Q(i, j) < 0)
        throw Error(ErrorCode::NonStochasticGenerator, "negative off-diagonal rate");
      sum += Q(i, j);
    }
    if (std::abs(sum) > 1e-10)
      throw Error(ErrorCode::NonStochasticGenerator, "row " + std::to_string(i) + " sums to " +
                                                         std::to_string(sum));
  }
}

namespace {

double uniformization_rate(const Eigen::MatrixXd& Q) {
  double lam = 0;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) lam = std::max(lam, -Q(i, i));
  return lam;
}

// Poisson(mu) weights up to a tail below tol
std::vector<double> poisson_weights(double mu, double tol) {
  std::vector<double> w;
  double p = std::exp(-mu), cum = 0;
  for (int k = 0;; ++k) {
    if (k > 0) p *= mu / k;
    w.push_back(p);
    cum += p;
    if (1.0 - cum <= tol && k >= mu) break;
    if (k > 100000) break;
  }
  return w;
}

}  // namespace

Eigen::VectorXd exact_distribution(const Eigen::MatrixXd& Q, const Eigen::VectorXd& initial,
                                   double t) {
  if (t < 0) throw Error(ErrorCode::InvalidSpec, "negative time");
  check_stochastic(Q);
  if (initial.size() != Q.rows()) throw Error(ErrorCode::WindowMismatch, "distribution size");
  double lam = uniformization_rate(Q);
  if (t == 0 || lam == 0) return initial;
  int chunks = std::max(1, static_cast<int>(std::ceil(lam * t / 20.0)));
  double mu = lam * t / chunks;
  auto w = poisson_weights(mu, 1e-12 / chunks);
  Eigen::MatrixXd Pt = Eigen::MatrixXd::Identity(Q.rows(), Q.cols()) + Q.transpose() / lam;
  Eigen::VectorXd v = initial;
  for (int c = 0; c < chunks; ++c) {
    Eigen::VectorXd term = v, acc = w[0] * v;
    for (std::size_t k = 1; k < w.size(); ++k) {
      term = Pt * term;
      acc += w[k] * term;
    }
    v = acc;
  }
  return v;
}

Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& Q, double t) {
  check_stochastic(Q);
  auto n = Q.rows();
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  double lam = uniformization_rate(Q);
  if (t == 0 || lam == 0) return I;
  int chunks = std::max(1, static_cast<int>(std::ceil(lam * t / 20.0)));
  double mu = lam * t / chunks;
  auto w = poisson_weights(mu, 1e-12 / chunks);
  Eigen::MatrixXd P = I + Q / lam;
  Eigen::MatrixXd acc = w[0] * I, term = I;
  for (std::size_t k = 1; k < w.size(); ++k) {
    term = term * P;
    acc += w[k] * term;
  }
  Eigen::MatrixXd M = acc;
  for (int c = 1; c < chunks; ++c) M = M * acc;
  return M;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Q) {
  auto n = Q.rows();
  Eigen::MatrixXd A = Q.transpose();
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1;
  return A.fullPivLu().solve(b);
}

std::vector<std::size_t> state_map(const GeneratorMatrix& from, const GeneratorMatrix& to,
                                   const std::function<Label(Label)>& relabel, bool reflect_sites) {
  std::vector<std::size_t> p(from.states.size());
  for (std::size_t i = 0; i < from.states.size(); ++i) {
    LabelTuple s = from.states[i];
    if (reflect_sites) std::reverse(s.begin(), s.end());
    for (auto& l : s) l = relabel(l);
    p[i] = to.index_of(s);
  }
  return p;
}

}  // namespace asep
