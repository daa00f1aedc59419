#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slln/random_generators.hpp"
#include "slln/space_models.hpp"

namespace slln {

struct NamedEnsemble {
  std::string name;
  GeneratorEnsemble ensemble;
  bool degenerate = false;  // deterministic: every error vanishes identically
};

/// A space model with the dimension left open.
struct ModelFamily {
  SpaceKind kind = SpaceKind::sequence_p;
  std::optional<double> p = 2.0;
  ScalarField scalars = ScalarField::real;

  SpaceModel at(int dim) const;
  static ModelFamily of(const SpaceModel& model);
};

/// Rescales every atom (and the mean) by rho / max atom norm.
GeneratorEnsemble rescale_to_budget(const Matrix& mean, const std::vector<Matrix>& perturbations,
                                    const std::vector<double>& weights, const SpaceModel& model,
                                    double rho);

/// Single atom M, a fixed non-normal 2x2 generator scaled to ||M|| = rho.
NamedEnsemble deterministic_ensemble(const SpaceModel& model, double rho);
/// Atoms +rho N and -rho N with N = e_2 e_1^T nilpotent (N e_1 = e_2), probabilities 1/2.
NamedEnsemble nilpotent_ensemble(const SpaceModel& model, double rho);
/// Commuting diagonal atoms M + D, M - D, M (three atoms).
NamedEnsemble diagonal_ensemble(const SpaceModel& model, double rho);
/// Gaussian (non-normal) M and D; atoms M + D, M - D, M.
NamedEnsemble random_nonnormal_ensemble(const SpaceModel& model, double rho, std::uint64_t seed);

/// deterministic (dim 2), nilpotent (dim 2), diagonal (dim 3) and random
/// non-normal (dims 2..6), each at rho = 0.5 and rho = 1.
std::vector<NamedEnsemble> standard_suite(const ModelFamily& family, std::uint64_t seed = 20240901);

/// Certified-norm model families used by the bound suite.
std::vector<ModelFamily> certified_families();

}  // namespace slln
