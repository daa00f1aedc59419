#include "slln/convergence_lab.hpp"

#include <algorithm>
#include <cmath>

#include "slln/errors.hpp"
#include "slln/kernels.hpp"
#include "slln/martingale_decomposition.hpp"
#include "slln/stats.hpp"

namespace slln {

PositiveForm build_form(const FormSpec& spec, const SpaceModel& model, const Matrix& functional) {
  const auto size = static_cast<int>(model.coord_count());
  switch (spec.kind) {
    case FormSpec::Kind::identity: return PositiveForm::from_gram(Matrix::Identity(size, size));
    case FormSpec::Kind::truncation: return truncation_form(spec.truncation, size);
    case FormSpec::Kind::rank_one: {
      const Matrix& f = spec.vector ? *spec.vector : functional;
      require_shape(model, f, "rank-one form vector");
      return rank_one_form({f});
    }
    case FormSpec::Kind::gram:
      if (!spec.gram || spec.gram->rows() != size) {
        throw InputError("form: Gram matrix must be coord_count x coord_count");
      }
      return PositiveForm::from_gram(*spec.gram);
  }
  throw InputError("form: unknown kind");
}

ExperimentInputs resolve_inputs(const ExperimentConfig& config, const NamedEnsemble& ensemble) {
  const SpaceModel& model = ensemble.ensemble.model();
  Matrix x = config.x ? *config.x : basis_element(model, 0).coords;
  require_shape(model, x, "experiment x");
  Matrix f = config.functional ? *config.functional : coordinate_functional(model, 0).coords;
  require_shape(model, f, "experiment functional");
  PositiveForm form = build_form(config.form.value_or(FormSpec{}), model, f);
  return {&ensemble, std::move(x), std::move(f), std::move(form), config.grid()};
}

namespace {

template <class Measure>
double sup_over_grid(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                     const TimeGrid& grid, Measure&& measure) {
  double sup = 0.0;
  for (double t : grid.values()) {
    const Matrix diff =
        (product_composition(path, ensemble, t, path.n()) - limit_semigroup(ensemble, t)) * x;
    sup = std::max(sup, measure(diff));
  }
  return sup;
}

}  // namespace

double sot_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                 const TimeGrid& grid) {
  return sup_over_grid(path, ensemble, x, grid,
                       [&](const Matrix& d) { return vector_norm(ensemble.model(), d); });
}

double wot_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                 const Matrix& f, const TimeGrid& grid) {
  return sup_over_grid(path, ensemble, x, grid, [&](const Matrix& d) { return std::abs(pairing(f, d)); });
}

double form_error(const SamplePath& path, const GeneratorEnsemble& ensemble, const Matrix& x,
                  const PositiveForm& form, const TimeGrid& grid) {
  return sup_over_grid(path, ensemble, x, grid, [&](const Matrix& d) { return seminorm_i(form, d); });
}

double chernoff_bias(const GeneratorEnsemble& ensemble, const Matrix& x, const TimeGrid& grid,
                     std::size_t n) {
  double sup = 0.0;
  for (double t : grid.values()) {
    const Matrix diff = (chernoff_iterate(ensemble, t, n) - limit_semigroup(ensemble, t)) * x;
    sup = std::max(sup, vector_norm(ensemble.model(), diff));
  }
  return sup;
}

std::vector<SweepResult> run_sweeps(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                    std::size_t trials, std::uint64_t seed, Centering centering,
                                    bool with_functional, bool with_form) {
  std::vector<SweepResult> out;
  for (std::size_t n : n_values) {
    SweepSpec spec{inputs.ensemble->ensemble,
                   inputs.x,
                   with_functional ? std::optional<Matrix>(inputs.functional) : std::nullopt,
                   with_form ? std::optional<PositiveForm>(inputs.form) : std::nullopt,
                   inputs.grid,
                   centering,
                   n,
                   seed,
                   trials};
    const PreparedSweep sweep(std::move(spec));
    out.push_back({n, kernels::omp::sweep(sweep)});
  }
  return out;
}

bool exceeds(double value, double epsilon) { return value > epsilon * (1.0 + 1e-9); }

SummaryRow summarize(const SweepResult& sweep, std::optional<double> epsilon, ErrorMetric metric) {
  if (sweep.records.empty()) throw InputError("summarize: no records");
  std::vector<double> sup;
  sup.reserve(sweep.records.size());
  for (const auto& r : sweep.records) {
    const std::optional<double> value = metric == ErrorMetric::sot   ? std::optional<double>(r.sup_error_sot)
                                        : metric == ErrorMetric::wot ? r.sup_error_wot
                                                                     : r.sup_error_form;
    if (!value) throw InputError("summarize: records lack the requested error column");
    sup.push_back(*value);
  }
  SummaryRow row;
  row.n = sweep.n;
  row.median_error = quantile(sup, 0.5);
  row.q10 = quantile(sup, 0.1);
  row.q90 = quantile(sup, 0.9);
  if (epsilon) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(sup.begin(), sup.end(), [&](double v) { return exceeds(v, *epsilon); }));
    row.tail_freq = static_cast<double>(hits) / static_cast<double>(sup.size());
    const Interval w = wilson_interval(hits, sup.size());
    row.wilson_lo = w.lo;
    row.wilson_hi = w.hi;
  }
  return row;
}

PathStudy path_convergence_study(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                 std::uint64_t seed) {
  if (n_values.size() < 2) throw InputError("path_convergence_study: need at least two n values");
  PathStudy study;
  study.n_values = n_values;
  study.conjecture_experiment = !inputs.ensemble->ensemble.model().is_uniformly_smooth();
  for (std::size_t n : n_values) {
    const PreparedSweep sweep(SweepSpec{inputs.ensemble->ensemble, inputs.x, std::nullopt, std::nullopt,
                                        inputs.grid, Centering::limit, n, seed, 1});
    study.errors.push_back(sweep.measure(0).sup_error_sot);
  }

  const double scale = *std::max_element(study.errors.begin(), study.errors.end());
  study.degenerate = inputs.ensemble->degenerate || scale <= 1e-12;
  if (study.degenerate) return study;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    for (std::size_t j = i + 1; j < n_values.size(); ++j) {
      if (n_values[j] == 4 * n_values[i]) pairs.emplace_back(i, j);
    }
  }
  if (pairs.empty()) {
    for (std::size_t i = 0; i + 1 < n_values.size(); ++i) pairs.emplace_back(i, i + 1);
  }
  std::size_t decreased = 0;
  for (auto [i, j] : pairs) decreased += study.errors[j] < study.errors[i] ? 1 : 0;
  study.decrease_fraction = static_cast<double>(decreased) / static_cast<double>(pairs.size());
  study.contract_met = study.decrease_fraction > 0.8;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (study.errors[i] > 0.0) {
      lx.push_back(std::log(static_cast<double>(n_values[i])));
      ly.push_back(std::log(study.errors[i]));
    }
  }
  if (lx.size() >= 2) study.slope = fit_line(lx, ly).slope;
  return study;
}

TailScan tail_scan(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                   std::size_t trials, std::uint64_t seed, std::optional<double> epsilon) {
  if (n_values.empty()) throw InputError("tail_scan: need n values");
  if (trials < 1) throw InputError("tail_scan: trials must be >= 1");
  return analyze_tails(inputs, run_sweeps(inputs, n_values, trials, seed, Centering::chernoff, false, false),
                       epsilon);
}

TailScan analyze_tails(const ExperimentInputs& inputs, const std::vector<SweepResult>& sweeps,
                       std::optional<double> epsilon) {
  if (sweeps.empty()) throw InputError("analyze_tails: no sweeps");
  TailScan scan;
  if (epsilon) {
    if (!(*epsilon > 0.0)) throw InputError("tail_scan: epsilon must be positive");
    scan.epsilon = *epsilon;
  } else {
    std::vector<double> first;
    for (const auto& r : sweeps.front().records) first.push_back(r.sup_error_sot);
    scan.epsilon = median(first);
    scan.epsilon_calibrated = true;
  }

  std::vector<double> lx, ly, w;
  scan.estimable = true;
  scan.below_resolution = true;
  for (const auto& sweep : sweeps) {
    TailRow row;
    row.n = sweep.n;
    row.trials = sweep.records.size();
    std::vector<double> sup;
    for (const auto& r : sweep.records) {
      sup.push_back(r.sup_error_sot);
      row.exceed += exceeds(r.sup_error_sot, scan.epsilon) ? 1 : 0;
    }
    row.freq = static_cast<double>(row.exceed) / static_cast<double>(row.trials);
    row.wilson = wilson_interval(row.exceed, row.trials);
    row.median_sup_mu = median(sup);
    row.chernoff_bias = chernoff_bias(inputs.ensemble->ensemble, inputs.x, inputs.grid, sweep.n);
    if (row.exceed > 0) scan.below_resolution = false;
    if (row.exceed < 10) scan.estimable = false;
    if (row.exceed > 0) {
      const double f = std::min(row.freq, 1.0 - 1.0 / static_cast<double>(row.trials + 1));
      lx.push_back(std::log(static_cast<double>(row.n)));
      ly.push_back(std::log(row.freq));
      w.push_back(static_cast<double>(row.trials) * f / (1.0 - f));  // 1 / Var(log freq)
    }
    scan.rows.push_back(row);
  }
  if (scan.below_resolution) scan.estimable = false;
  if (lx.size() >= 2) scan.slope = fit_line(lx, ly, w).slope;
  if (scan.estimable && scan.slope) scan.contract_met = *scan.slope <= kTailSlopeContract;
  return scan;
}

double default_moment_order(double p_s) {
  if (!(p_s > 1.0 && p_s <= 2.0)) throw InputError("moment order: p_s must lie in (1, 2]");
  return 2.0 * p_s / (p_s - 1.0);
}

BurkholderSeries burkholder_ratio(const ExperimentInputs& inputs, const std::vector<std::size_t>& n_values,
                                  std::size_t trials, std::uint64_t seed, double t, double p_s,
                                  double r) {
  if (!(p_s > 1.0 && p_s <= 2.0)) throw InputError("burkholder_ratio: p_s must lie in (1, 2]");
  if (!(r >= 1.0)) throw InputError("burkholder_ratio: r must be >= 1");
  if (trials < 1 || n_values.empty()) throw InputError("burkholder_ratio: need trials and n values");
  const GeneratorEnsemble& ensemble = inputs.ensemble->ensemble;
  const SpaceModel& model = ensemble.model();

  BurkholderSeries series;
  series.p_s = p_s;
  series.r = r;
  series.t = t;
  for (std::size_t n : n_values) {
    BurkholderRow row;
    row.n = n;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const SamplePath path = sample_iid(ensemble, n, derive_seed(seed, trial));
      const DecompositionContext ctx(path, ensemble, n, t / static_cast<double>(n));
      const auto d = all_increments(ctx, inputs.x);
      Matrix total = Matrix::Zero(inputs.x.rows(), inputs.x.cols());
      double power_sum = 0.0;
      for (const auto& dk : d) {
        total += dk;
        power_sum += std::pow(vector_norm(model, dk), p_s);
      }
      row.lhs += std::pow(vector_norm(model, total), r);
      row.rhs += std::pow(power_sum, r / p_s);
    }
    row.lhs /= static_cast<double>(trials);
    row.rhs /= static_cast<double>(trials);
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    series.rows.push_back(row);
  }

  std::vector<double> ratios;
  for (const auto& row : series.rows) {
    if (row.rhs <= 0.0) series.degenerate = true;
    ratios.push_back(row.ratio);
  }
  if (series.degenerate) return series;
  series.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  series.median_ratio = median(ratios);
  series.contract_met = series.max_ratio <= 3.0 * series.median_ratio;
  return series;
}

}  // namespace slln
