#include "slln/random_generators.hpp"

#include <cmath>
#include <numeric>

#include "slln/errors.hpp"

namespace slln {

namespace {

constexpr double kProbSumTolerance = 1e-12;

void validate_probs(const std::vector<double>& probs, std::size_t atoms, const char* what) {
  if (atoms == 0) throw InputError(std::string(what) + ": at least one atom required");
  if (probs.size() != atoms) throw InputError(std::string(what) + ": probs/atoms length mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputError(std::string(what) + ": probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    throw InputError(std::string(what) + ": probabilities must sum to 1");
  }
}

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

DiscreteOperatorDistribution::DiscreteOperatorDistribution(std::vector<Matrix> atoms,
                                                           std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  validate_probs(probs_, atoms_.size(), "operator distribution");
  const auto rows = atoms_.front().rows();
  for (const auto& a : atoms_) {
    if (a.rows() != rows || a.cols() != rows || rows == 0) {
      throw InputError("operator distribution: atoms must share one square shape");
    }
    if (!a.allFinite()) throw InputError("operator distribution: non-finite atom entry");
  }
}

DiscreteElementDistribution::DiscreteElementDistribution(std::vector<Matrix> atoms,
                                                         std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  validate_probs(probs_, atoms_.size(), "element distribution");
  for (const auto& a : atoms_) {
    if (a.rows() != atoms_.front().rows() || a.cols() != atoms_.front().cols()) {
      throw InputError("element distribution: atoms must share one shape");
    }
  }
}

namespace {
Matrix weighted_sum(const std::vector<Matrix>& atoms, const std::vector<double>& probs) {
  Matrix sum = Matrix::Zero(atoms.front().rows(), atoms.front().cols());
  for (std::size_t w = 0; w < atoms.size(); ++w) sum += probs[w] * atoms[w];
  return sum;
}
}  // namespace

Matrix expectation(const DiscreteOperatorDistribution& dist) {
  return weighted_sum(dist.atoms(), dist.probs());
}

Matrix expectation(const DiscreteElementDistribution& dist) {
  return weighted_sum(dist.atoms(), dist.probs());
}

GeneratorEnsemble GeneratorEnsemble::certify(DiscreteOperatorDistribution dist,
                                             const SpaceModel& model) {
  if (dist.dim() != model.dim()) throw InputError("ensemble: atom size does not match model dim");
  double rho = 0.0;
  for (const auto& a : dist.atoms()) rho = std::max(rho, certified_operator_norm(model, a));
  Matrix mean = expectation(dist);
  return GeneratorEnsemble(std::move(dist), model, rho, std::move(mean));
}

bool GeneratorEnsemble::is_deterministic() const {
  for (const auto& a : dist_.atoms()) {
    if (a != dist_.atoms().front()) return false;
  }
  return true;
}

GeneratorEnsemble build_symmetric_ensemble(const Matrix& mean, const std::vector<Matrix>& perturbations,
                                           const std::vector<double>& weights,
                                           const SpaceModel& model) {
  if (perturbations.size() != weights.size()) {
    throw InputError("build_symmetric_ensemble: perturbations/weights length mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InputError("build_symmetric_ensemble: weights must be positive");
    total += w;
  }
  if (total > 1.0 + kProbSumTolerance) {
    throw InputError("build_symmetric_ensemble: weights must sum to at most 1");
  }

  std::vector<Matrix> atoms;
  std::vector<double> probs;
  for (std::size_t j = 0; j < perturbations.size(); ++j) {
    if (perturbations[j].rows() != mean.rows() || perturbations[j].cols() != mean.cols()) {
      throw InputError("build_symmetric_ensemble: perturbation shape differs from mean");
    }
    atoms.push_back(mean + perturbations[j]);
    probs.push_back(weights[j] / 2.0);
    atoms.push_back(mean - perturbations[j]);
    probs.push_back(weights[j] / 2.0);
  }
  const double leftover = 1.0 - total;
  if (leftover > kProbSumTolerance || atoms.empty()) {
    atoms.push_back(mean);
    probs.push_back(std::max(leftover, 0.0));
  } else if (leftover != 0.0) {
    // Fold round-off into the last pair so probabilities sum to one.
    probs.back() += leftover;
  }
  return GeneratorEnsemble::certify(DiscreteOperatorDistribution(std::move(atoms), std::move(probs)),
                                    model);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed ^ mix64(counter + 0x9e3779b97f4a7c15ULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) {
  return seed ^ mix64(trial * 0xd1b54a32d192ed03ULL + 1);
}

const Matrix& SamplePath::generator(const GeneratorEnsemble& ensemble, std::size_t i) const {
  if (i < 1 || i > indices.size()) throw InputError("sample path: generator index out of range");
  return ensemble.atom(indices[i - 1]);
}

SamplePath sample_iid(const GeneratorEnsemble& ensemble, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample_iid: n must be >= 1");
  const auto& probs = ensemble.dist().probs();
  std::vector<double> cumulative(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());

  SamplePath path{seed, std::vector<std::uint32_t>(n)};
  const auto last = static_cast<std::uint32_t>(probs.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = counter_uniform(seed, i);
    std::uint32_t w = 0;
    while (w < last && u >= cumulative[w]) ++w;
    path.indices[i] = w;
  }
  return path;
}

SamplePath path_from_indices(const GeneratorEnsemble& ensemble, std::vector<std::uint32_t> indices) {
  for (auto w : indices) {
    if (w >= ensemble.atom_count()) throw InputError("path_from_indices: atom index out of range");
  }
  return SamplePath{0, std::move(indices)};
}

DeviationReport check_independence_product(const DiscreteOperatorDistribution& a,
                                           const DiscreteOperatorDistribution& b) {
  if (a.atoms().front().cols() != b.atoms().front().rows()) {
    throw InputError("check_independence_product: shapes do not compose");
  }
  Matrix joint = Matrix::Zero(a.atoms().front().rows(), b.atoms().front().cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      joint += (a.probs()[i] * b.probs()[j]) * (a.atoms()[i] * b.atoms()[j]);
    }
  }
  return {max_abs(joint - expectation(a) * expectation(b)), tol::kExact};
}

DeviationReport check_expectation_action(const DiscreteOperatorDistribution& a, const Matrix& x) {
  if (x.rows() != a.dim()) throw InputError("check_expectation_action: element shape mismatch");
  Matrix lhs = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t w = 0; w < a.size(); ++w) lhs += a.probs()[w] * (a.atoms()[w] * x);
  return {max_abs(lhs - expectation(a) * x), 1e-13};
}

DeviationReport check_adjoint_expectation(const DiscreteOperatorDistribution& a) {
  Matrix lhs = Matrix::Zero(a.dim(), a.dim());
  for (std::size_t w = 0; w < a.size(); ++w) lhs += a.probs()[w] * a.atoms()[w].adjoint();
  const Matrix mean = expectation(a);
  return {max_abs(lhs - mean.adjoint()), 1e-14};
}

DeviationReport check_random_element_action(const DiscreteOperatorDistribution& a,
                                            const DiscreteElementDistribution& xi) {
  if (xi.atoms().front().rows() != a.dim()) {
    throw InputError("check_random_element_action: element shape mismatch");
  }
  const auto& x0 = xi.atoms().front();
  Matrix lhs = Matrix::Zero(x0.rows(), x0.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < xi.atoms().size(); ++j) {
      lhs += (a.probs()[i] * xi.probs()[j]) * (a.atoms()[i] * xi.atoms()[j]);
    }
  }
  return {max_abs(lhs - expectation(a) * expectation(xi)), 1e-13};
}

}  // namespace slln
