#include "slln/standard_suite.hpp"

#include <random>
#include <sstream>

#include "slln/errors.hpp"

namespace slln {

SpaceModel ModelFamily::at(int dim) const {
  switch (kind) {
    case SpaceKind::sequence_p: return SpaceModel::sequence(p.value(), dim, scalars);
    case SpaceKind::schatten_p: return SpaceModel::schatten(p.value(), dim, scalars);
    case SpaceKind::max_norm: return SpaceModel::max_norm(dim, scalars);
  }
  throw InputError("model family: unknown kind");
}

ModelFamily ModelFamily::of(const SpaceModel& model) {
  return {model.kind(), model.p(), model.scalars()};
}

GeneratorEnsemble rescale_to_budget(const Matrix& mean, const std::vector<Matrix>& perturbations,
                                    const std::vector<double>& weights, const SpaceModel& model,
                                    double rho) {
  if (!(rho > 0.0)) throw InputError("rescale_to_budget: rho must be positive");
  const auto raw = build_symmetric_ensemble(mean, perturbations, weights, model);
  if (raw.rho() == 0.0) throw InputError("rescale_to_budget: all atoms vanish");
  const double c = rho / raw.rho();
  std::vector<Matrix> scaled;
  for (const auto& d : perturbations) scaled.push_back(c * d);
  return build_symmetric_ensemble(c * mean, scaled, weights, model);
}

namespace {

std::string label(const std::string& kind, const SpaceModel& model, double rho) {
  std::ostringstream os;
  os << kind << "/" << model.name() << "/rho=" << rho;
  return os.str();
}

Matrix gaussian(int dim, bool complex, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double re = g(rng);
    m(i) = {re, complex ? g(rng) : 0.0};
  }
  return m;
}

}  // namespace

NamedEnsemble deterministic_ensemble(const SpaceModel& model, double rho) {
  if (model.dim() != 2) throw InputError("deterministic_ensemble: needs dim 2");
  Matrix m(2, 2);
  m << -0.5, 1.0, 0.25, -1.0;
  return {label("deterministic", model, rho), rescale_to_budget(m, {}, {}, model, rho), true};
}

NamedEnsemble nilpotent_ensemble(const SpaceModel& model, double rho) {
  if (model.dim() < 2) throw InputError("nilpotent_ensemble: needs dim >= 2");
  const int d = model.dim();
  Matrix n = Matrix::Zero(d, d);
  n(1, 0) = 1.0;
  return {label("nilpotent", model, rho),
          rescale_to_budget(Matrix::Zero(d, d), {n}, {1.0}, model, rho), false};
}

NamedEnsemble diagonal_ensemble(const SpaceModel& model, double rho) {
  if (model.dim() != 3) throw InputError("diagonal_ensemble: needs dim 3");
  Matrix m = Matrix::Zero(3, 3);
  Matrix d = Matrix::Zero(3, 3);
  m.diagonal() << -1.0, 0.5, 0.25;
  d.diagonal() << 0.5, -0.5, 1.0;
  return {label("diagonal", model, rho), rescale_to_budget(m, {d}, {0.5}, model, rho), false};
}

NamedEnsemble random_nonnormal_ensemble(const SpaceModel& model, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const bool complex = model.scalars() == ScalarField::complex;
  const Matrix m = 0.5 * gaussian(model.dim(), complex, rng);
  const Matrix d = gaussian(model.dim(), complex, rng);
  return {label("random", model, rho), rescale_to_budget(m, {d}, {0.5}, model, rho), false};
}

std::vector<NamedEnsemble> standard_suite(const ModelFamily& family, std::uint64_t seed) {
  std::vector<NamedEnsemble> suite;
  for (double rho : {0.5, 1.0}) {
    suite.push_back(deterministic_ensemble(family.at(2), rho));
    suite.push_back(nilpotent_ensemble(family.at(2), rho));
    suite.push_back(diagonal_ensemble(family.at(3), rho));
    for (int dim = 2; dim <= 6; ++dim) {
      suite.push_back(random_nonnormal_ensemble(family.at(dim), rho, seed + static_cast<std::uint64_t>(dim)));
    }
  }
  return suite;
}

std::vector<ModelFamily> certified_families() {
  return {
      {SpaceKind::sequence_p, 1.0, ScalarField::real},
      {SpaceKind::sequence_p, 2.0, ScalarField::real},
      {SpaceKind::max_norm, std::nullopt, ScalarField::real},
      {SpaceKind::schatten_p, 1.0, ScalarField::real},
      {SpaceKind::schatten_p, 3.0, ScalarField::complex},
  };
}

}  // namespace slln
