#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slln/errors.hpp"
#include "slln/linalg.hpp"

namespace slln {

enum class SpaceKind { sequence_p, schatten_p, max_norm };
enum class ScalarField { real, complex };

std::string to_string(SpaceKind kind);
std::string to_string(ScalarField field);

/// A finite-dimensional normed space. Elements are stored as coordinate
/// matrices: dim x 1 for sequence_p and max_norm, dim x dim for schatten_p.
/// Generators (dim x dim) act on elements by left multiplication.
class SpaceModel {
 public:
  static SpaceModel sequence(double p, int dim, ScalarField scalars = ScalarField::real);
  static SpaceModel schatten(double p, int dim, ScalarField scalars = ScalarField::real);
  static SpaceModel max_norm(int dim, ScalarField scalars = ScalarField::real);

  SpaceKind kind() const { return kind_; }
  std::optional<double> p() const { return p_; }
  int dim() const { return dim_; }
  ScalarField scalars() const { return scalars_; }

  Eigen::Index rows() const { return dim_; }
  Eigen::Index cols() const { return kind_ == SpaceKind::schatten_p ? dim_ : 1; }
  Eigen::Index coord_count() const { return rows() * cols(); }

  /// Hilbert-space models: l_2 and Schatten-2.
  bool is_euclidean() const;
  /// Models where operator_norm(..., exact) is available.
  bool has_exact_operator_norm() const;
  /// Models known to be uniformly smooth (1 < p < inf).
  bool is_uniformly_smooth() const;

  /// Dual exponent for dual norms (inf encoded as +infinity).
  double dual_exponent() const;

  std::string name() const;

  bool operator==(const SpaceModel&) const = default;

 private:
  SpaceModel(SpaceKind kind, std::optional<double> p, int dim, ScalarField scalars);

  SpaceKind kind_;
  std::optional<double> p_;
  int dim_;
  ScalarField scalars_;
};

struct Element {
  Matrix coords;
};

struct DualFunctional {
  Matrix coords;
};

void require_shape(const SpaceModel& model, const Matrix& coords, const char* what);

Element zero_element(const SpaceModel& model);
/// Coordinate basis element e_j (column-major index for Schatten models).
Element basis_element(const SpaceModel& model, Eigen::Index j);
DualFunctional coordinate_functional(const SpaceModel& model, Eigen::Index j);

/// Gaussian coordinates; imaginary parts only for complex models.
Matrix random_coords(const SpaceModel& model, std::mt19937_64& rng);

double vector_norm(const SpaceModel& model, const Element& x);
double vector_norm(const SpaceModel& model, const Matrix& coords);

/// Norm of f in the dual space X*, so that |<f,x>| <= dual_norm(f) * ||x||.
double dual_norm(const SpaceModel& model, const DualFunctional& f);

/// <f, x> = sum_j conj(f_j) x_j. Conjugate-linear in f, linear in x.
Scalar pairing(const DualFunctional& f, const Element& x);
Scalar pairing(const Matrix& f, const Matrix& x);

enum class NormMode { exact, lower_bound };

struct OperatorNorm {
  double value = 0.0;
  bool certified = false;
};

inline constexpr std::size_t kLowerBoundProbes = 10'000;
inline constexpr int kLowerBoundAscentSteps = 50;

/// Induced norm of X -> AX on the model. Exact mode is available for
/// p in {1, 2}, max_norm and every Schatten model; lower_bound mode is a
/// certified-sound underestimate from random probes plus ascent refinement.
OperatorNorm operator_norm(const SpaceModel& model, const Matrix& a, NormMode mode,
                           std::uint64_t seed = 0x5eed);

/// Exact norm or CapabilityError.
double certified_operator_norm(const SpaceModel& model, const Matrix& a);

/// Best available norm: exact where supported, otherwise a lower bound.
OperatorNorm best_operator_norm(const SpaceModel& model, const Matrix& a);

struct SmoothnessViolation {
  std::size_t trial = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct SmoothnessReport {
  std::size_t trials = 0;
  std::vector<SmoothnessViolation> violations;
  /// max over sampled y != 0 of (||x+y||^p + ||x-y||^p - 2||x||^p) / ||y||^p.
  double empirical_min_constant = 0.0;
  /// max over samples of |lhs - rhs| / max(rhs, tiny), useful for equality cases.
  double max_relative_gap = 0.0;
};

/// lhs and rhs of ||x+y||^p + ||x-y||^p <= 2||x||^p + C||y||^p.
std::pair<double, double> p_smooth_sides(const SpaceModel& model, const Matrix& x,
                                         const Matrix& y, double p_s, double c);

SmoothnessReport p_smooth_check(const SpaceModel& model, double p_s, double c,
                                std::size_t trials, std::uint64_t seed);

/// A positive operator i : X -> X* given by a Hermitian PSD Gram matrix on
/// the coordinate vector (column-major for Schatten models):
/// <i(x), y> = pairing(G x, y).
class PositiveForm {
 public:
  static PositiveForm from_gram(Matrix gram);

  const Matrix& gram() const { return gram_; }
  Eigen::Index size() const { return gram_.rows(); }
  /// ||i|| as an operator l_2 -> l_2 (spectral norm of G).
  double norm() const;

 private:
  explicit PositiveForm(Matrix gram) : gram_(std::move(gram)) {}
  Matrix gram_;
};

/// sqrt(<i(x), x>).
double seminorm_i(const PositiveForm& form, const Element& x);
double seminorm_i(const PositiveForm& form, const Matrix& coords);

/// i(y) := f(y) f, so that seminorm_i(y) = |<f, y>|.
PositiveForm rank_one_form(const DualFunctional& f);

/// Diagonal Gram with N leading ones: <i(x), x> = sum_{n<=N} |x_n|^2.
PositiveForm truncation_form(int n, int dim);

}  // namespace slln
