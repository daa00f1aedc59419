#include "slln/trial_sweep.hpp"

#include <algorithm>
#include <cmath>

#include "slln/errors.hpp"

namespace slln {

PreparedSweep::PreparedSweep(SweepSpec spec) : spec_(std::move(spec)) {
  const SpaceModel& model = spec_.ensemble.model();
  require_shape(model, spec_.x, "sweep: x");
  if (spec_.functional) require_shape(model, *spec_.functional, "sweep: functional");
  if (spec_.form && spec_.form->size() != model.coord_count()) {
    throw InputError("sweep: form size does not match the model");
  }
  if (spec_.n < 1) throw InputError("sweep: n must be >= 1");
  if (spec_.trials < 1) throw InputError("sweep: trials must be >= 1");

  const double n = static_cast<double>(spec_.n);
  for (double t : spec_.grid.values()) {
    tables_.emplace_back(spec_.ensemble, t / n);
    const Matrix center = spec_.centering == Centering::limit
                              ? limit_semigroup(spec_.ensemble, t)
                              : matrix_power(tables_.back().expected(), spec_.n);
    centers_.push_back(center * spec_.x);
  }
}

TrialRecord PreparedSweep::measure(std::size_t trial) const {
  const SpaceModel& model = spec_.ensemble.model();
  TrialRecord record;
  record.seed = derive_seed(spec_.seed, trial);
  record.trial = trial;
  record.n = spec_.n;
  const SamplePath path = sample_iid(spec_.ensemble, spec_.n, record.seed);

  double wot = 0.0;
  double form = 0.0;
  record.errors.reserve(tables_.size());
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    const Matrix diff = apply_composition(path, tables_[j], spec_.n, spec_.x) - centers_[j];
    const double err = vector_norm(model, diff);
    record.errors.push_back(err);
    record.sup_error_sot = std::max(record.sup_error_sot, err);
    if (spec_.functional) wot = std::max(wot, std::abs(pairing(*spec_.functional, diff)));
    if (spec_.form) form = std::max(form, seminorm_i(*spec_.form, diff));
  }
  if (spec_.functional) record.sup_error_wot = wot;
  if (spec_.form) record.sup_error_form = form;
  return record;
}

}  // namespace slln
