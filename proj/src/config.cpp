#include "slln/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "slln/standard_suite.hpp"

namespace slln {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid config:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

class Validator {
 public:
  void fail(const std::string& path, const std::string& what) { problems_.push_back(path + ": " + what); }
  bool ok() const { return problems_.empty(); }
  const std::vector<std::string>& problems() const { return problems_; }

  void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.contains(key)) fail(path + "." + key, "unknown key");
    }
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(path + "." + key, "expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      fail(path + "." + key, "integer out of range");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj.at(key).is_string()) {
      fail(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::optional<Scalar> scalar(const json& v, const std::string& path, bool real_only) {
    if (v.is_number() && std::isfinite(v.get<double>())) return Scalar(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number() &&
        std::isfinite(v[0].get<double>()) && std::isfinite(v[1].get<double>())) {
      const Scalar z(v[0].get<double>(), v[1].get<double>());
      if (real_only && z.imag() != 0.0) {
        fail(path, "complex entry in a real model");
        return std::nullopt;
      }
      return z;
    }
    fail(path, "expected a finite number or [re, im]");
    return std::nullopt;
  }

  std::optional<Matrix> matrix(const json& v, Eigen::Index rows, Eigen::Index cols, const std::string& path,
                               bool real_only) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows");
      return std::nullopt;
    }
    Matrix m(rows, cols);
    bool good = true;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json& row = v[static_cast<std::size_t>(i)];
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        fail(rp, "expected " + std::to_string(cols) + " entries");
        good = false;
        continue;
      }
      for (Eigen::Index j = 0; j < cols; ++j) {
        const auto z = scalar(row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]", real_only);
        if (z) m(i, j) = *z; else good = false;
      }
    }
    return good ? std::optional<Matrix>(m) : std::nullopt;
  }

  std::optional<Matrix> element(const json& v, const SpaceModel& model, const std::string& path) {
    const bool real_only = model.scalars() == ScalarField::real;
    if (model.cols() > 1) return matrix(v, model.rows(), model.cols(), path, real_only);
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != model.rows()) {
      fail(path, "expected " + std::to_string(model.rows()) + " entries");
      return std::nullopt;
    }
    Matrix m(model.rows(), 1);
    bool good = true;
    for (Eigen::Index i = 0; i < model.rows(); ++i) {
      const auto z = scalar(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]", real_only);
      if (z) m(i, 0) = *z; else good = false;
    }
    return good ? std::optional<Matrix>(m) : std::nullopt;
  }

 private:
  std::vector<std::string> problems_;
};

struct ModelSpec {
  ModelFamily family;
  int dim = 0;
};

std::optional<ModelSpec> parse_model(Validator& v, const json& doc, bool suite) {
  if (!doc.contains("model")) {
    v.fail("model", "required");
    return std::nullopt;
  }
  const json& m = doc.at("model");
  if (!m.is_object()) {
    v.fail("model", "expected an object");
    return std::nullopt;
  }
  v.reject_unknown(m, "model", {"kind", "p", "dim", "scalars"});
  ModelSpec spec;
  bool good = true;
  const auto kind = v.string(m, "kind", "model");
  if (!kind) {
    if (!m.contains("kind")) v.fail("model.kind", "required");
    good = false;
  } else if (*kind == "sequence_p") {
    spec.family.kind = SpaceKind::sequence_p;
  } else if (*kind == "schatten_p") {
    spec.family.kind = SpaceKind::schatten_p;
  } else if (*kind == "max_norm") {
    spec.family.kind = SpaceKind::max_norm;
  } else {
    v.fail("model.kind", "must be sequence_p, schatten_p or max_norm");
    good = false;
  }
  const auto p = v.number(m, "p", "model");
  if (good && spec.family.kind == SpaceKind::max_norm) {
    if (m.contains("p")) v.fail("model.p", "not allowed for max_norm");
    spec.family.p.reset();
  } else if (good) {
    if (!p) {
      if (!m.contains("p")) v.fail("model.p", "required");
      good = false;
    } else if (!(*p >= 1.0)) {
      v.fail("model.p", "must be >= 1");
      good = false;
    } else {
      spec.family.p = *p;
    }
  }
  const auto scalars = v.string(m, "scalars", "model").value_or("real");
  if (scalars == "real") {
    spec.family.scalars = ScalarField::real;
  } else if (scalars == "complex") {
    spec.family.scalars = ScalarField::complex;
  } else {
    v.fail("model.scalars", "must be real or complex");
    good = false;
  }
  const auto dim = v.integer(m, "dim", "model");
  if (!suite) {
    if (!dim) {
      if (!m.contains("dim")) v.fail("model.dim", "required");
      good = false;
    } else if (*dim < 1 || *dim > 64) {
      v.fail("model.dim", "must lie in [1, 64]");
      good = false;
    } else {
      spec.dim = static_cast<int>(*dim);
    }
  }
  return good ? std::optional<ModelSpec>(spec) : std::nullopt;
}

std::vector<Matrix> matrix_list(Validator& v, const json& obj, const std::string& key, const std::string& path,
                                const SpaceModel& model, bool& good) {
  std::vector<Matrix> out;
  if (!obj.contains(key)) {
    v.fail(path + "." + key, "required");
    good = false;
    return out;
  }
  const json& list = obj.at(key);
  if (!list.is_array()) {
    v.fail(path + "." + key, "expected a list of matrices");
    good = false;
    return out;
  }
  const bool real_only = model.scalars() == ScalarField::real;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto m = v.matrix(list[i], model.dim(), model.dim(), path + "." + key + "[" + std::to_string(i) + "]",
                      real_only);
    if (m) out.push_back(std::move(*m)); else good = false;
  }
  return out;
}

std::vector<double> number_list(Validator& v, const json& obj, const std::string& key, const std::string& path,
                                bool& good) {
  std::vector<double> out;
  if (!obj.contains(key)) {
    v.fail(path + "." + key, "required");
    good = false;
    return out;
  }
  const json& list = obj.at(key);
  if (!list.is_array()) {
    v.fail(path + "." + key, "expected a list of numbers");
    good = false;
    return out;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_number() || !std::isfinite(list[i].get<double>())) {
      v.fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a finite number");
      good = false;
    } else {
      out.push_back(list[i].get<double>());
    }
  }
  return out;
}

std::optional<NamedEnsemble> parse_ensemble(Validator& v, const json& e, const SpaceModel& model) {
  if (!e.is_object()) {
    v.fail("ensemble", "expected an object");
    return std::nullopt;
  }
  const auto name = v.string(e, "name", "ensemble");
  bool good = true;
  try {
    if (e.contains("standard")) {
      v.reject_unknown(e, "ensemble", {"standard", "rho", "seed", "name"});
      const auto which = v.string(e, "standard", "ensemble");
      const double rho = v.number(e, "rho", "ensemble").value_or(1.0);
      if (!(rho > 0.0)) {
        v.fail("ensemble.rho", "must be positive");
        return std::nullopt;
      }
      const auto seed = v.integer(e, "seed", "ensemble").value_or(20240901);
      if (!which) return std::nullopt;
      std::optional<NamedEnsemble> out;
      if (*which == "deterministic") out = deterministic_ensemble(model, rho);
      else if (*which == "nilpotent") out = nilpotent_ensemble(model, rho);
      else if (*which == "diagonal") out = diagonal_ensemble(model, rho);
      else if (*which == "random") out = random_nonnormal_ensemble(model, rho, static_cast<std::uint64_t>(seed));
      else v.fail("ensemble.standard", "must be deterministic, nilpotent, diagonal or random");
      if (out && name) out->name = *name;
      return out;
    }
    if (e.contains("atoms")) {
      v.reject_unknown(e, "ensemble", {"atoms", "probs", "name"});
      auto atoms = matrix_list(v, e, "atoms", "ensemble", model, good);
      auto probs = number_list(v, e, "probs", "ensemble", good);
      if (!good) return std::nullopt;
      if (atoms.empty()) {
        v.fail("ensemble.atoms", "need at least one atom");
        return std::nullopt;
      }
      if (atoms.size() != probs.size()) {
        v.fail("ensemble.probs", "must have one entry per atom");
        return std::nullopt;
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) {
          v.fail("ensemble.probs[" + std::to_string(i) + "]", "must be nonnegative");
          good = false;
        }
        sum += probs[i];
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "must sum to 1 within 1e-9 (sum is " << std::setprecision(17) << sum << ")";
        v.fail("ensemble.probs", os.str());
        good = false;
      }
      if (!good) return std::nullopt;
      for (auto& p : probs) p /= sum;
      auto ens = GeneratorEnsemble::certify(DiscreteOperatorDistribution(std::move(atoms), std::move(probs)), model);
      const bool degenerate = ens.is_deterministic();
      return NamedEnsemble{name.value_or("custom/" + model.name()), std::move(ens), degenerate};
    }
    if (e.contains("mean")) {
      v.reject_unknown(e, "ensemble", {"mean", "perturbations", "weights", "name"});
      const auto mean = v.matrix(e.at("mean"), model.dim(), model.dim(), "ensemble.mean",
                                 model.scalars() == ScalarField::real);
      std::vector<Matrix> perturbations;
      std::vector<double> weights;
      if (e.contains("perturbations") || e.contains("weights")) {
        perturbations = matrix_list(v, e, "perturbations", "ensemble", model, good);
        weights = number_list(v, e, "weights", "ensemble", good);
      }
      if (!good || !mean) return std::nullopt;
      if (perturbations.size() != weights.size()) {
        v.fail("ensemble.weights", "must have one entry per perturbation");
        return std::nullopt;
      }
      double total = 0.0;
      for (double w : weights) total += w;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) {
          v.fail("ensemble.weights[" + std::to_string(i) + "]", "must be positive");
          good = false;
        }
      }
      if (total > 1.0 + 1e-9) {
        v.fail("ensemble.weights", "must sum to at most 1");
        good = false;
      }
      if (!good) return std::nullopt;
      auto ens = build_symmetric_ensemble(*mean, perturbations, weights, model);
      const bool degenerate = ens.is_deterministic();
      return NamedEnsemble{name.value_or("symmetric/" + model.name()), std::move(ens), degenerate};
    }
    v.fail("ensemble", "needs one of standard, atoms or mean");
  } catch (const std::exception& ex) {
    v.fail("ensemble", ex.what());
  }
  return std::nullopt;
}

std::optional<FormSpec> parse_form(Validator& v, const json& f, const std::optional<SpaceModel>& model) {
  if (!f.is_object()) {
    v.fail("form", "expected an object");
    return std::nullopt;
  }
  v.reject_unknown(f, "form", {"kind", "n", "vector", "gram"});
  FormSpec spec;
  const auto kind = v.string(f, "kind", "form");
  if (!kind) {
    if (!f.contains("kind")) v.fail("form.kind", "required");
    return std::nullopt;
  }
  if (*kind == "identity") {
    spec.kind = FormSpec::Kind::identity;
  } else if (*kind == "truncation") {
    spec.kind = FormSpec::Kind::truncation;
    const auto n = v.integer(f, "n", "form");
    if (!n || *n < 1) {
      v.fail("form.n", "truncation needs an integer n >= 1");
      return std::nullopt;
    }
    spec.truncation = static_cast<int>(*n);
  } else if (*kind == "rank_one") {
    spec.kind = FormSpec::Kind::rank_one;
    if (f.contains("vector")) {
      if (!model) {
        v.fail("form.vector", "not allowed with the standard suite");
        return std::nullopt;
      }
      spec.vector = v.element(f.at("vector"), *model, "form.vector");
      if (!spec.vector) return std::nullopt;
    }
  } else if (*kind == "gram") {
    spec.kind = FormSpec::Kind::gram;
    if (!model) {
      v.fail("form.gram", "not allowed with the standard suite");
      return std::nullopt;
    }
    if (!f.contains("gram")) {
      v.fail("form.gram", "required for kind gram");
      return std::nullopt;
    }
    spec.gram = v.matrix(f.at("gram"), model->coord_count(), model->coord_count(), "form.gram", false);
    if (!spec.gram) return std::nullopt;
    try {
      (void)PositiveForm::from_gram(*spec.gram);
    } catch (const std::exception& ex) {
      v.fail("form.gram", ex.what());
      return std::nullopt;
    }
  } else {
    v.fail("form.kind", "must be identity, truncation, rank_one or gram");
    return std::nullopt;
  }
  return spec;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InputError(join_problems(problems)), problems_(std::move(problems)) {}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

LoadedConfig validate_config(const json& document) {
  Validator v;
  if (!document.is_object()) throw ConfigError({"document: expected a JSON object"});
  v.reject_unknown(document, "config",
                   {"schema", "model", "ensemble", "suite", "x", "functional", "form", "T", "grid_points",
                    "n_values", "trials", "seed", "epsilon", "p_s", "r"});

  LoadedConfig out;
  json normalized = document;
  ExperimentConfig& cfg = out.config;

  const auto schema = v.integer(document, "schema", "config");
  if (!document.contains("schema")) v.fail("config.schema", "required");
  else if (schema && *schema != kConfigSchemaVersion) v.fail("config.schema", "unsupported version (expected 1)");

  const bool has_suite = document.contains("suite");
  const bool has_ensemble = document.contains("ensemble");
  if (has_suite && has_ensemble) v.fail("config", "give either ensemble or suite, not both");
  if (!has_suite && !has_ensemble) v.fail("config", "one of ensemble or suite is required");
  if (has_suite) {
    const auto suite = v.string(document, "suite", "config");
    if (suite && *suite != "standard") v.fail("config.suite", "only \"standard\" is known");
  }
  cfg.standard_suite = has_suite;

  const auto model_spec = parse_model(v, document, has_suite);
  std::optional<SpaceModel> model;
  if (model_spec && !has_suite) {
    try {
      model = model_spec->family.at(model_spec->dim);
    } catch (const std::exception& ex) {
      v.fail("model", ex.what());
    }
  }

  if (model_spec && has_suite) {
    try {
      cfg.ensembles = standard_suite(model_spec->family);
    } catch (const std::exception& ex) {
      v.fail("suite", ex.what());
    }
  } else if (model && has_ensemble) {
    if (auto e = parse_ensemble(v, document.at("ensemble"), *model)) cfg.ensembles.push_back(std::move(*e));
  }

  for (const char* key : {"x", "functional"}) {
    if (!document.contains(key)) continue;
    if (has_suite) {
      v.fail(std::string("config.") + key, "not allowed with the standard suite (dimensions vary)");
    } else if (model) {
      auto m = v.element(document.at(key), *model, key);
      if (std::string(key) == "x") cfg.x = std::move(m); else cfg.functional = std::move(m);
    }
  }
  if (document.contains("form") && (model || has_suite)) {
    cfg.form = parse_form(v, document.at("form"), model);
  }

  cfg.horizon = v.number(document, "T", "config").value_or(1.0);
  if (!(cfg.horizon >= 0.0)) v.fail("config.T", "must be >= 0");
  normalized["T"] = cfg.horizon;

  const auto grid_points = v.integer(document, "grid_points", "config");
  if (grid_points && *grid_points < 2) v.fail("config.grid_points", "must be >= 2");
  else if (grid_points) cfg.grid_points = static_cast<std::size_t>(*grid_points);
  normalized["grid_points"] = cfg.grid_points;

  if (document.contains("n_values")) {
    const json& nv = document.at("n_values");
    if (!nv.is_array() || nv.empty()) {
      v.fail("config.n_values", "expected a nonempty list of integers");
    } else {
      cfg.n_values.clear();
      for (std::size_t i = 0; i < nv.size(); ++i) {
        const std::string path = "config.n_values[" + std::to_string(i) + "]";
        if (!nv[i].is_number_integer()) {
          v.fail(path, "expected an integer");
        } else if (nv[i].get<std::int64_t>() <= 0) {
          v.fail(path, "must be positive");
        } else {
          const auto n = static_cast<std::size_t>(nv[i].get<std::int64_t>());
          if (!cfg.n_values.empty() && n <= cfg.n_values.back()) v.fail(path, "n_values must be strictly increasing");
          cfg.n_values.push_back(n);
        }
      }
    }
  }
  normalized["n_values"] = cfg.n_values;

  const auto trials = v.integer(document, "trials", "config");
  if (trials && *trials < 1) v.fail("config.trials", "must be >= 1");
  else if (trials) cfg.trials = static_cast<std::size_t>(*trials);
  normalized["trials"] = cfg.trials;

  if (document.contains("seed")) {
    const json& s = document.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      v.fail("config.seed", "expected a nonnegative integer");
    } else {
      cfg.seed = s.get<std::uint64_t>();
    }
  }
  normalized["seed"] = cfg.seed;

  cfg.epsilon = v.number(document, "epsilon", "config");
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) v.fail("config.epsilon", "must be > 0");

  cfg.p_s = v.number(document, "p_s", "config").value_or(2.0);
  if (!(cfg.p_s > 1.0 && cfg.p_s <= 2.0)) {
    v.fail("config.p_s", "must lie in (1, 2]");
  } else {
    cfg.r = v.number(document, "r", "config").value_or(default_moment_order(cfg.p_s));
    if (!(cfg.r >= 1.0)) v.fail("config.r", "must be >= 1");
  }
  normalized["p_s"] = cfg.p_s;
  normalized["r"] = cfg.r;

  if (!v.ok()) throw ConfigError(v.problems());
  out.normalized = std::move(normalized);
  out.hash = sha256_hex(out.normalized.dump());
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open config file"});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& ex) {
    throw ConfigError({path.string() + ": " + ex.what()});
  }
  return validate_config(doc);
}

void override_seed(LoadedConfig& loaded, std::uint64_t seed) {
  loaded.config.seed = seed;
  loaded.normalized["seed"] = seed;
  loaded.hash = sha256_hex(loaded.normalized.dump());
}

}  // namespace slln
