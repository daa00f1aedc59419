#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slln/linalg.hpp"
#include "slln/space_models.hpp"

namespace slln {

/// A simple random operator: finitely many atoms with probabilities.
class DiscreteOperatorDistribution {
 public:
  DiscreteOperatorDistribution(std::vector<Matrix> atoms, std::vector<double> probs);

  const std::vector<Matrix>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return atoms_.size(); }
  Eigen::Index dim() const { return atoms_.front().rows(); }

 private:
  std::vector<Matrix> atoms_;
  std::vector<double> probs_;
};

/// A simple random element of X (same storage shape as Element).
class DiscreteElementDistribution {
 public:
  DiscreteElementDistribution(std::vector<Matrix> atoms, std::vector<double> probs);

  const std::vector<Matrix>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<Matrix> atoms_;
  std::vector<double> probs_;
};

/// E A = sum_w p_w A_w, accumulated in atom order.
Matrix expectation(const DiscreteOperatorDistribution& dist);
Matrix expectation(const DiscreteElementDistribution& dist);

/// A law of generators with a certified norm budget rho in a fixed model.
class GeneratorEnsemble {
 public:
  /// Computes rho as the max certified atom norm; CapabilityError if the
  /// model has no certified operator norm.
  static GeneratorEnsemble certify(DiscreteOperatorDistribution dist, const SpaceModel& model);

  const DiscreteOperatorDistribution& dist() const { return dist_; }
  const SpaceModel& model() const { return model_; }
  double rho() const { return rho_; }
  const Matrix& mean() const { return mean_; }
  Eigen::Index dim() const { return dist_.dim(); }
  std::size_t atom_count() const { return dist_.size(); }
  const Matrix& atom(std::size_t w) const { return dist_.atoms()[w]; }
  bool is_deterministic() const;

 private:
  GeneratorEnsemble(DiscreteOperatorDistribution dist, SpaceModel model, double rho, Matrix mean)
      : dist_(std::move(dist)), model_(model), rho_(rho), mean_(std::move(mean)) {}

  DiscreteOperatorDistribution dist_;
  SpaceModel model_;
  double rho_;
  Matrix mean_;
};

/// Atoms M + D_j and M - D_j with probability w_j / 2 each, plus M with the
/// leftover mass 1 - sum w_j (omitted when zero).
GeneratorEnsemble build_symmetric_ensemble(const Matrix& mean, const std::vector<Matrix>& perturbations,
                                           const std::vector<double>& weights,
                                           const SpaceModel& model);

/// Counter-based generator: value depends only on (seed, counter).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter);
/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);
/// Per-trial seed derived from the experiment seed and the trial index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial);

struct SamplePath {
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> indices;

  std::size_t n() const { return indices.size(); }
  /// Generator A_i, 1-based like the index sets it is used with.
  const Matrix& generator(const GeneratorEnsemble& ensemble, std::size_t i) const;
};

/// i.i.d. atom indices; draw i uses counter i, so paths of different
/// lengths from one seed are prefixes of each other.
SamplePath sample_iid(const GeneratorEnsemble& ensemble, std::size_t n, std::uint64_t seed);

/// Deterministic path from explicit atom indices.
SamplePath path_from_indices(const GeneratorEnsemble& ensemble, std::vector<std::uint32_t> indices);

struct DeviationReport {
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed() const { return deviation <= tolerance; }
};

/// E(AB) by enumerating the product space against (EA)(EB).
DeviationReport check_independence_product(const DiscreteOperatorDistribution& a,
                                           const DiscreteOperatorDistribution& b);
/// (EA)x against E(Ax).
DeviationReport check_expectation_action(const DiscreteOperatorDistribution& a, const Matrix& x);
/// E(A^*) against (EA)^*.
DeviationReport check_adjoint_expectation(const DiscreteOperatorDistribution& a);
/// E(A xi) over the product space against (EA)(E xi).
DeviationReport check_random_element_action(const DiscreteOperatorDistribution& a,
                                            const DiscreteElementDistribution& xi);

}  // namespace slln
