#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slln/linalg.hpp"
#include "slln/random_generators.hpp"
#include "slln/semigroup_engine.hpp"
#include "slln/space_models.hpp"

namespace slln {

/// What the random composition is compared against.
enum class Centering {
  limit,     // e^{E[A] t}: the full error of the law of large numbers
  chernoff,  // F(t/n)^n: the martingale part mu_n(t) only
};

struct TrialRecord {
  std::uint64_t seed = 0;  // derived per-trial seed
  std::uint64_t trial = 0;
  std::uint64_t n = 0;
  double sup_error_sot = 0.0;
  std::optional<double> sup_error_wot;
  std::optional<double> sup_error_form;
  std::vector<double> errors;  // norm error at each grid point

  bool operator==(const TrialRecord&) const = default;
};

struct SweepSpec {
  GeneratorEnsemble ensemble;
  Matrix x;
  std::optional<Matrix> functional;
  std::optional<PositiveForm> form;
  TimeGrid grid{1.0};
  Centering centering = Centering::limit;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
};

/// A sweep with every per-grid-point quantity (factor tables, centred
/// targets) precomputed; trial t uses path sample_iid(n, derive_seed(seed, t)),
/// so a trial's path at n is a prefix of its path at any larger n.
class PreparedSweep {
 public:
  explicit PreparedSweep(SweepSpec spec);

  const SweepSpec& spec() const { return spec_; }
  std::size_t trials() const { return spec_.trials; }
  TrialRecord measure(std::size_t trial) const;

 private:
  SweepSpec spec_;
  std::vector<FactorTable> tables_;
  std::vector<Matrix> centers_;
};

}  // namespace slln
