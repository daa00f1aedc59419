#include "slln/space_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace slln {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd singular_values(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

double lp_norm(const Eigen::ArrayXd& magnitudes, double p) {
  if (magnitudes.size() == 0) return 0.0;
  if (std::isinf(p)) return magnitudes.maxCoeff();
  if (p == 1.0) return magnitudes.sum();
  if (p == 2.0) return std::sqrt(magnitudes.square().sum());
  // Scale by the max entry to keep pow() in range.
  const double top = magnitudes.maxCoeff();
  if (top == 0.0) return 0.0;
  return top * std::pow((magnitudes / top).pow(p).sum(), 1.0 / p);
}

Eigen::Map<const Eigen::VectorXcd> flat(const Matrix& m) {
  return {m.data(), m.size()};
}

// psi_p(y)_i = y_i |y_i|^{p-2}: the duality map used by Boyd's power method.
Matrix duality_map(const Matrix& y, double p) {
  Matrix out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mag = std::abs(y(i));
    out(i) = mag == 0.0 ? Scalar{0.0} : y(i) * std::pow(mag, p - 2.0);
  }
  return out;
}

}  // namespace

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::sequence_p: return "sequence_p";
    case SpaceKind::schatten_p: return "schatten_p";
    case SpaceKind::max_norm: return "max_norm";
  }
  return "?";
}

std::string to_string(ScalarField field) {
  return field == ScalarField::real ? "real" : "complex";
}

SpaceModel::SpaceModel(SpaceKind kind, std::optional<double> p, int dim, ScalarField scalars)
    : kind_(kind), p_(p), dim_(dim), scalars_(scalars) {
  if (dim < 1) throw InputError("space model: dim must be >= 1");
  if (kind == SpaceKind::max_norm) {
    if (p.has_value()) throw InputError("space model: max_norm takes no exponent");
  } else if (!p.has_value() || !(*p >= 1.0) || std::isinf(*p)) {
    throw InputError("space model: exponent must satisfy 1 <= p < inf");
  }
}

SpaceModel SpaceModel::sequence(double p, int dim, ScalarField scalars) {
  return SpaceModel(SpaceKind::sequence_p, p, dim, scalars);
}

SpaceModel SpaceModel::schatten(double p, int dim, ScalarField scalars) {
  return SpaceModel(SpaceKind::schatten_p, p, dim, scalars);
}

SpaceModel SpaceModel::max_norm(int dim, ScalarField scalars) {
  return SpaceModel(SpaceKind::max_norm, std::nullopt, dim, scalars);
}

bool SpaceModel::is_euclidean() const { return p_.has_value() && *p_ == 2.0; }

bool SpaceModel::has_exact_operator_norm() const {
  switch (kind_) {
    case SpaceKind::max_norm:
    case SpaceKind::schatten_p: return true;
    case SpaceKind::sequence_p: return *p_ == 1.0 || *p_ == 2.0;
  }
  return false;
}

bool SpaceModel::is_uniformly_smooth() const {
  return kind_ != SpaceKind::max_norm && *p_ > 1.0;
}

double SpaceModel::dual_exponent() const {
  if (kind_ == SpaceKind::max_norm) return 1.0;
  if (*p_ == 1.0) return kInf;
  return *p_ / (*p_ - 1.0);
}

std::string SpaceModel::name() const {
  std::ostringstream os;
  switch (kind_) {
    case SpaceKind::sequence_p: os << "l" << *p_; break;
    case SpaceKind::schatten_p: os << "S" << *p_; break;
    case SpaceKind::max_norm: os << "linf"; break;
  }
  os << "^" << dim_;
  if (scalars_ == ScalarField::complex) os << "(C)";
  return os.str();
}

void require_shape(const SpaceModel& model, const Matrix& coords, const char* what) {
  if (coords.rows() != model.rows() || coords.cols() != model.cols()) {
    std::ostringstream os;
    os << what << ": shape " << coords.rows() << "x" << coords.cols() << " does not match "
       << model.name() << " (" << model.rows() << "x" << model.cols() << ")";
    throw InputError(os.str());
  }
}

Element zero_element(const SpaceModel& model) {
  return {Matrix::Zero(model.rows(), model.cols())};
}

Element basis_element(const SpaceModel& model, Eigen::Index j) {
  if (j < 0 || j >= model.coord_count()) throw InputError("basis_element: index out of range");
  Element e = zero_element(model);
  e.coords(j) = 1.0;
  return e;
}

DualFunctional coordinate_functional(const SpaceModel& model, Eigen::Index j) {
  return {basis_element(model, j).coords};
}

Matrix random_coords(const SpaceModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(model.rows(), model.cols());
  const bool complex = model.scalars() == ScalarField::complex;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double re = gauss(rng);
    const double im = complex ? gauss(rng) : 0.0;
    m(i) = {re, im};
  }
  return m;
}

double vector_norm(const SpaceModel& model, const Matrix& coords) {
  require_shape(model, coords, "vector_norm");
  switch (model.kind()) {
    case SpaceKind::max_norm: return max_abs(coords);
    case SpaceKind::sequence_p: return lp_norm(coords.cwiseAbs().array().reshaped(), *model.p());
    case SpaceKind::schatten_p: return lp_norm(singular_values(coords).array(), *model.p());
  }
  return 0.0;
}

double vector_norm(const SpaceModel& model, const Element& x) {
  return vector_norm(model, x.coords);
}

double dual_norm(const SpaceModel& model, const DualFunctional& f) {
  require_shape(model, f.coords, "dual_norm");
  const double q = model.dual_exponent();
  if (model.kind() == SpaceKind::schatten_p) {
    return lp_norm(singular_values(f.coords).array(), q);
  }
  return lp_norm(f.coords.cwiseAbs().array().reshaped(), q);
}

Scalar pairing(const Matrix& f, const Matrix& x) {
  if (f.rows() != x.rows() || f.cols() != x.cols()) {
    throw InputError("pairing: functional and element shapes differ");
  }
  return flat(f).dot(flat(x));  // Eigen's dot conjugates the left operand
}

Scalar pairing(const DualFunctional& f, const Element& x) { return pairing(f.coords, x.coords); }

OperatorNorm operator_norm(const SpaceModel& model, const Matrix& a, NormMode mode,
                           std::uint64_t seed) {
  if (a.rows() != model.dim() || a.cols() != model.dim()) {
    throw InputError("operator_norm: matrix is not dim x dim for " + model.name());
  }
  if (mode == NormMode::exact) {
    switch (model.kind()) {
      case SpaceKind::max_norm:
        return {a.cwiseAbs().rowwise().sum().maxCoeff(), true};
      case SpaceKind::schatten_p:
        // Left multiplication X -> AX on S_p has norm ||A||_{2->2}.
        return {spectral_norm(a), true};
      case SpaceKind::sequence_p:
        if (*model.p() == 1.0) return {a.cwiseAbs().colwise().sum().maxCoeff(), true};
        if (*model.p() == 2.0) return {spectral_norm(a), true};
        throw CapabilityError("operator_norm: exact induced norm unavailable for " + model.name());
    }
  }

  std::mt19937_64 rng(seed);
  double best = 0.0;
  Matrix best_probe = basis_element(model, 0).coords;
  auto consider = [&](const Matrix& x) {
    const double nx = vector_norm(model, x);
    if (nx == 0.0) return;
    const double ratio = vector_norm(model, a * x) / nx;
    if (ratio > best) {
      best = ratio;
      best_probe = x;
    }
  };

  for (Eigen::Index j = 0; j < model.coord_count(); ++j) consider(basis_element(model, j).coords);
  if (model.kind() == SpaceKind::max_norm) {
    // Phase-aligned vectors realise each row's absolute sum.
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      Matrix x(model.dim(), 1);
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double mag = std::abs(a(r, c));
        x(c) = mag == 0.0 ? Scalar{1.0} : std::conj(a(r, c)) / mag;
      }
      consider(x);
    }
  }
  for (std::size_t i = 0; i < kLowerBoundProbes; ++i) consider(random_coords(model, rng));

  if (model.kind() == SpaceKind::schatten_p) {
    // Rank-one probes u e_1^T have ratio ||Au||_2 / ||u||_2; refine by power iteration.
    Eigen::VectorXcd u = best_probe.col(0);
    if (u.norm() == 0.0) u = Eigen::VectorXcd::Ones(model.dim());
    for (int step = 0; step < kLowerBoundAscentSteps; ++step) {
      Eigen::VectorXcd next = a.adjoint() * (a * u);
      if (next.norm() == 0.0) break;
      u = next / next.norm();
      Matrix probe = Matrix::Zero(model.rows(), model.cols());
      probe.col(0) = u;
      consider(probe);
    }
  } else if (model.kind() == SpaceKind::sequence_p && *model.p() > 1.0) {
    // Boyd's power method: x <- psi_q(A^* psi_p(Ax)), a normalized ascent step for ||Ax||_p.
    const double p = *model.p();
    const double q = p / (p - 1.0);
    Matrix x = best_probe / vector_norm(model, best_probe);
    for (int step = 0; step < kLowerBoundAscentSteps; ++step) {
      const Matrix z = a.adjoint() * duality_map(a * x, p);
      Matrix next = duality_map(z, q);
      const double nn = vector_norm(model, next);
      if (nn == 0.0 || !std::isfinite(nn)) break;
      x = next / nn;
      consider(x);
    }
  }
  return {best, false};
}

double certified_operator_norm(const SpaceModel& model, const Matrix& a) {
  if (!model.has_exact_operator_norm()) {
    throw CapabilityError("no certified operator norm for " + model.name());
  }
  return operator_norm(model, a, NormMode::exact).value;
}

OperatorNorm best_operator_norm(const SpaceModel& model, const Matrix& a) {
  return operator_norm(model, a,
                       model.has_exact_operator_norm() ? NormMode::exact : NormMode::lower_bound);
}

std::pair<double, double> p_smooth_sides(const SpaceModel& model, const Matrix& x,
                                         const Matrix& y, double p_s, double c) {
  const double lhs = std::pow(vector_norm(model, x + y), p_s) +
                     std::pow(vector_norm(model, x - y), p_s);
  const double rhs = 2.0 * std::pow(vector_norm(model, x), p_s) +
                     c * std::pow(vector_norm(model, y), p_s);
  return {lhs, rhs};
}

SmoothnessReport p_smooth_check(const SpaceModel& model, double p_s, double c,
                                std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("p_smooth_check: trials must be >= 1");
  if (!(p_s > 1.0 && p_s <= 2.0)) throw InputError("p_smooth_check: p_s must lie in (1, 2]");
  if (!(c > 0.0)) throw InputError("p_smooth_check: C must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
  SmoothnessReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Matrix x = random_coords(model, rng);
    const Matrix y = random_coords(model, rng) * std::pow(10.0, log_scale(rng));
    const auto [lhs, rhs] = p_smooth_sides(model, x, y, p_s, c);
    if (lhs > rhs * (1.0 + tol::kNorm)) report.violations.push_back({t, lhs, rhs});
    report.max_relative_gap =
        std::max(report.max_relative_gap, std::abs(lhs - rhs) / std::max(rhs, 1e-300));

    const double ny = std::pow(vector_norm(model, y), p_s);
    if (ny > 0.0) {
      const double needed = (lhs - 2.0 * std::pow(vector_norm(model, x), p_s)) / ny;
      report.empirical_min_constant = std::max(report.empirical_min_constant, needed);
    }
  }
  return report;
}

PositiveForm PositiveForm::from_gram(Matrix gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw FormInvariantError("positive form: Gram matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, max_abs(gram));
  if (max_abs(gram - gram.adjoint()) > tol::kExact * scale) {
    throw FormInvariantError("positive form: Gram matrix is not Hermitian");
  }
  const Matrix herm = 0.5 * (gram + gram.adjoint());
  const double lowest = Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
  if (lowest < -tol::kNorm * scale) {
    throw FormInvariantError("positive form: Gram matrix has a negative eigenvalue");
  }
  return PositiveForm(herm);
}

double PositiveForm::norm() const { return spectral_norm(gram_); }

double seminorm_i(const PositiveForm& form, const Matrix& coords) {
  if (coords.size() != form.size()) throw InputError("seminorm_i: element size does not match form");
  const auto v = flat(coords);
  const Scalar q = (form.gram() * v).dot(v);
  const double scale = std::max(1.0, form.norm() * v.squaredNorm());
  if (std::abs(q.imag()) > tol::kNorm * scale) {
    throw FormInvariantError("seminorm_i: quadratic form has a non-negligible imaginary part");
  }
  if (q.real() < -tol::kNorm * scale) {
    throw FormInvariantError("seminorm_i: negative quadratic value");
  }
  return std::sqrt(std::max(0.0, q.real()));
}

double seminorm_i(const PositiveForm& form, const Element& x) { return seminorm_i(form, x.coords); }

PositiveForm rank_one_form(const DualFunctional& f) {
  const Eigen::VectorXcd v = flat(f.coords);
  return PositiveForm::from_gram(v * v.adjoint());
}

PositiveForm truncation_form(int n, int dim) {
  if (dim < 1 || n < 1 || n > dim) throw InputError("truncation_form: need 1 <= N <= dim");
  Matrix g = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) g(i, i) = 1.0;
  return PositiveForm::from_gram(std::move(g));
}

}  // namespace slln
