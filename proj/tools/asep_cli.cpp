#include <CLI11.hpp>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>

#include "asep/error.hpp"
#include "asep/lab.hpp"

using namespace asep;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t replicas = 0;
  std::string out;
  unsigned threads = 0;
  std::vector<std::string> sets;
};

int run_kind(lab::Kind kind, const Flags& f) {
  std::string text = "kind = " + lab::kind_name(kind) + "\n";
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw Error(ErrorCode::InvalidSpec, "cannot read " + f.config);
    std::stringstream ss;
    ss << in.rdbuf();
    lab::ExperimentSpec probe = lab::parse_spec(ss.str());
    if (ss.str().find("kind") != std::string::npos && probe.kind != kind)
      throw Error(ErrorCode::InvalidSpec, "config kind " + lab::kind_name(probe.kind) +
                                              " does not match the subcommand");
    text += ss.str() + "\n";
  }
  for (const auto& s : f.sets) text += s + "\n";
  lab::ExperimentSpec spec = lab::parse_spec(text);
  if (f.seed) spec.base_seed = *f.seed;
  if (f.replicas) spec.replicas = f.replicas;
  if (!f.out.empty()) spec.out = f.out;
  if (f.threads) spec.threads = f.threads;
  lab::validate(spec);
  auto res = lab::run(spec);
  auto manifest = lab::write_outputs(spec, res);
  std::cout << lab::report(res);
  if (!spec.out.empty()) std::cout << "outputs in " << spec.out << " (spec hash " << manifest.spec_hash << ")\n";
  return lab::exit_code(res);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-species ASEP laboratory"};
  app.require_subcommand(1);
  Flags f;
  std::vector<std::pair<CLI::App*, lab::Kind>> subs;
  const std::vector<std::pair<lab::Kind, std::string>> kinds = {
      {lab::Kind::Simulate, "evolve one initial condition and write trajectory and heights"},
      {lab::Kind::Couple, "pathwise attractivity and monotonicity under the basic coupling"},
      {lab::Kind::SpeedLaw, "law of X_t/t for the second class particle"},
      {lab::Kind::SpeedProcess, "marginals and shift invariance of the speed process"},
      {lab::Kind::Concentration, "height deviations from the hydrodynamic profile"},
      {lab::Kind::Perturbation, "second class injection after time S"},
      {lab::Kind::QLaplace, "q-Laplace transform against the Fredholm determinant"},
      {lab::Kind::MinParticle, "TASEP height law against the Laguerre gap probability"},
      {lab::Kind::RezSweep, "one versus many second class particles comparison"},
      {lab::Kind::Schedule, "time schedule S_m and its growth bound"},
  };
  for (const auto& [k, desc] : kinds) {
    CLI::App* sub = app.add_subcommand(lab::kind_name(k), desc);
    sub->add_option("--config", f.config, "key = value spec file");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--replicas", f.replicas, "number of replicas");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--threads", f.threads, "worker threads");
    sub->add_option("--set", f.sets, "extra key=value overrides");
    subs.emplace_back(sub, k);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    for (auto& [sub, k] : subs)
      if (sub->parsed()) return run_kind(k, f);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
