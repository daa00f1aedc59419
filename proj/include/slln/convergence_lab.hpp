#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slln/fourth_moment.hpp"
#include "slln/linalg.hpp"
#include "slln/random_generators.hpp"
#include "slln/semigroup_engine.hpp"
#include "slln/space_models.hpp"
#include "slln/standard_suite.hpp"
#include "slln/stats.hpp"
#include "slln/trial_sweep.hpp"

namespace slln {

/// How the positive form of a seminorm experiment is chosen.
struct FormSpec {
  enum class Kind { identity, truncation, rank_one, gram };
  Kind kind = Kind::identity;
  int truncation = 1;            // N for Kind::truncation
  std::optional<Matrix> vector;  // f for Kind::rank_one (defaults to the functional)
  std::optional<Matrix> gram;    // for Kind::gram
};

struct ExperimentConfig {
  int schema = 1;
  /// One ensemble, or the whole standard suite.
  std::vector<NamedEnsemble> ensembles;
  bool standard_suite = false;
  std::optional<Matrix> x;
  std::optional<Matrix> functional;
  std::optional<FormSpec> form;
  double horizon = 1.0;
  std::size_t grid_points = TimeGrid::kDefaultPoints;
  std::vector<std::size_t> n_values{16, 64, 256};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  double p_s = 2.0;
  double r = 4.0;  // 2 p_s / (p_s - 1) unless set

  TimeGrid grid() const { return TimeGrid(horizon, grid_points); }
};

/// Concrete x, f and form for one ensemble of a config. Defaults: x = e_1,
/// f = first coordinate functional, form = identity Gram.
struct ExperimentInputs {
  const NamedEnsemble* ensemble = nullptr;
  Matrix x;
  Matrix functional;
  PositiveForm form;
  TimeGrid grid;
};

ExperimentInputs resolve_inputs(const ExperimentConfig& config, const NamedEnsemble& ensemble);

PositiveForm build_form(const FormSpec& spec, const SpaceModel& model, const Matrix& functional);

/// sup over the grid of ||(e^{A_1 t/n} ... e^{A_n t/n} - e^{E[A] t}) x||, n = path length.
double sot_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                 const TimeGrid& grid);
/// sup over the grid of |<f, (...) x>|.
double wot_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                 const Matrix& f, const TimeGrid& grid);
/// sup over the grid of ||(...) x||_i.
double form_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                  const PositiveForm& form, const TimeGrid& grid);

/// sup over the grid of ||(F(t/n)^n - e^{E[A] t}) x||: the deterministic
/// Chernoff bias, separate from the martingale fluctuation.
double chernoff_bias(const GeneratorEnsemble& ensemble, const Matrix& x, const TimeGrid& grid,
                     std::size_t n);

struct SweepResult {
  std::size_t n = 0;
  std::vector<TrialRecord> records;
};

/// Monte Carlo trials at each n (OpenMP kernel; deterministic in the worker count).
std::vector<SweepResult> run_sweeps(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                    std::size_t trials, std::uint64_t seed, Centering centering,
                                    bool with_functional, bool with_form);

struct SummaryRow {
  std::size_t n = 0;
  double median_error = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double tail_freq = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

enum class ErrorMetric { sot, wot, form };

/// Order statistics of one sup-error column; tail columns count errors > epsilon.
SummaryRow summarize(const SweepResult& sweep, std::optional<double> epsilon,
                     ErrorMetric metric = ErrorMetric::sot);

/// Exceedance with a relative guard so that ties at epsilon are not
/// decided by round-off.
bool exceeds(double value, double epsilon);

struct PathStudy {
  std::vector<std::size_t> n_values;
  std::vector<double> errors;
  double decrease_fraction = 0.0;
  std::optional<double> slope;  // log error vs log n, absent when degenerate
  bool degenerate = false;
  bool conjecture_experiment = false;  // model not uniformly smooth
  bool contract_met = false;           // decrease_fraction > 0.8
};

/// One growing path (prefix property): errors at each n, the fraction of
/// pairs (n, 4n) whose error decreased, and the log-log slope.
PathStudy path_convergence_study(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                 std::uint64_t seed);

struct TailRow {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t exceed = 0;
  double freq = 0.0;
  Interval wilson;
  double median_sup_mu = 0.0;
  double chernoff_bias = 0.0;
};

struct TailScan {
  double epsilon = 0.0;
  bool epsilon_calibrated = false;  // epsilon = median sup ||mu_n|| at the first n
  std::vector<TailRow> rows;
  bool below_resolution = false;  // every tail frequency is zero
  bool estimable = false;         // every frequency >= 10 / trials
  std::optional<double> slope;    // weighted log-log fit over nonzero frequencies
  std::optional<bool> contract_met;  // slope <= -1.5, only in the estimable regime
};

inline constexpr double kTailSlopeContract = -1.5;

/// Tail frequencies of sup_t ||mu_n(t)|| > epsilon (centred at the Chernoff
/// iterate) with Wilson intervals and a weighted log-log slope.
TailScan tail_scan(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                   std::size_t trials, std::uint64_t seed, std::optional<double> epsilon);

/// The analysis half of tail_scan, on sweeps already centred at the Chernoff iterate.
TailScan analyze_tails(const ExperimentInputs& inputs, const std::vector<SweepResult>& sweeps,
                       std::optional<double> epsilon);

struct BurkholderRow {
  std::size_t n = 0;
  double lhs = 0.0;  // E ||mu_n||^r
  double rhs = 0.0;  // E (sum_k ||d_{n,k}||^p)^{r/p}
  double ratio = 0.0;
};

struct BurkholderSeries {
  double p_s = 2.0;
  double r = 4.0;
  double t = 1.0;
  std::vector<BurkholderRow> rows;
  bool degenerate = false;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  bool contract_met = false;  // max <= 3 * median
};

/// Monte Carlo estimates of both sides of the Burkholder-type inequality at time t.
BurkholderSeries burkholder_ratio(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                  std::size_t trials, std::uint64_t seed, double t, double p_s,
                                  double r);

/// Default moment order 2 p / (p - 1).
double default_moment_order(double p_s);

}  // namespace slln
