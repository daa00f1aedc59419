#include "slln/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "slln/config.hpp"
#include "slln/convergence_lab.hpp"
#include "slln/fourth_moment.hpp"
#include "slln/kernels.hpp"
#include "slln/martingale_decomposition.hpp"
#include "slln/persist.hpp"

namespace slln::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  int workers = 0;
  // fourth-moment
  unsigned n = 0;
  std::string u;
  bool probe = false;
  double rho = 1.0;
  double t = 0.5;
  // report
  std::vector<std::string> inputs;
};

struct Context {
  const Options& options;
  LoadedConfig loaded;
  fs::path output_dir;
  std::ostream& out;

  Provenance provenance() const { return {loaded.hash, loaded.config.seed}; }
  const ExperimentConfig& config() const { return loaded.config; }
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

fs::path prepare_output_dir(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw IoError("cannot create output directory " + dir);
  return path;
}

fs::path artifact(const Context& ctx, const NamedEnsemble& e, const std::string& command, const char* ext) {
  return ctx.output_dir / (file_stem(e.name) + "." + command + ext);
}

int verify_identities(Context& ctx) {
  const auto& cfg = ctx.config();
  bool ok = true;
  std::uint64_t stream = 0;
  for (const auto& e : cfg.ensembles) {
    const auto inputs = resolve_inputs(cfg, e);
    const auto& ens = e.ensemble;
    double expansion_worst = 0.0;
    bool expansion_ok = true;
    for (std::size_t n = 1; n <= 8; ++n) {
      for (double s : {0.1, 0.5, 1.0}) {
        const auto path = sample_iid(ens, n, derive_seed(cfg.seed, stream++));
        const auto r = expansion_identity_check(path, ens, s, n);
        expansion_worst = std::max(expansion_worst, r.max_deviation / r.scale);
        expansion_ok = expansion_ok && r.passed();
      }
    }

    const std::size_t martingale_n = ens.atom_count() <= 3 ? 5 : 3;
    const double martingale = kernels::omp::martingale_worst_average(ens, cfg.horizon, martingale_n, inputs.x,
                                                                     kernels::default_workers());
    const bool martingale_ok = MartingaleReport{martingale}.passed();

    std::mt19937_64 rng(derive_seed(cfg.seed, stream++));
    const DiscreteElementDistribution xi({inputs.x, random_coords(ens.model(), rng)}, {0.5, 0.5});
    const DeviationReport lemmas[] = {
        check_independence_product(ens.dist(), ens.dist()),
        check_expectation_action(ens.dist(), inputs.x),
        check_adjoint_expectation(ens.dist()),
        check_random_element_action(ens.dist(), xi),
    };
    const bool lemmas_ok = std::all_of(std::begin(lemmas), std::end(lemmas),
                                       [](const DeviationReport& r) { return r.passed(); });

    const bool all = expansion_ok && martingale_ok && lemmas_ok;
    ok = ok && all;
    ctx.out << (all ? "ok   " : "FAIL ") << e.name << "  expansion(rel)=" << fixed(expansion_worst, 3)
            << "  martingale=" << fixed(martingale, 3) << "  lemmas=" << (lemmas_ok ? "ok" : "FAIL") << '\n';
    if (ctx.options.verbose) {
      const char* names[] = {"independence", "expectation-action", "adjoint", "random-element"};
      for (std::size_t i = 0; i < 4; ++i) {
        ctx.out << "       " << names[i] << ": " << fixed(lemmas[i].deviation, 3) << " <= "
                << fixed(lemmas[i].tolerance, 3) << '\n';
      }
    }
  }
  ctx.out << (ok ? "all identities hold\n" : "identity violations found\n");
  return ok ? kOk : kViolation;
}

int check_bounds(Context& ctx) {
  const auto& cfg = ctx.config();
  bool ok = true;
  std::uint64_t stream = 0;
  for (const auto& e : cfg.ensembles) {
    const auto report = run_bound_suite(e.ensemble, cfg.trials, derive_seed(cfg.seed, stream++));
    ok = ok && report.passed();
    ctx.out << (report.passed() ? "ok   " : "FAIL ") << e.name << "  trials=" << report.trials
            << "  checks=" << report.checks << "  violations=" << report.violations.size()
            << (report.certified ? "" : "  (lower-bound norms)") << '\n';
    const std::size_t shown = ctx.options.verbose ? report.violations.size() : std::min<std::size_t>(3, report.violations.size());
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& v = report.violations[i];
      ctx.out << "       trial " << v.trial << ": " << v.bound << "  value=" << fixed(v.value, 12)
              << " limit=" << fixed(v.limit, 12) << '\n';
    }
  }
  ctx.out << (ok ? "all bounds hold\n" : "bound violations found\n");
  return ok ? kOk : kViolation;
}

int run_errors(Context& ctx, const std::string& command, ErrorMetric metric) {
  const auto& cfg = ctx.config();
  bool ok = true;
  for (const auto& e : cfg.ensembles) {
    const auto inputs = resolve_inputs(cfg, e);
    const bool with_functional = metric != ErrorMetric::sot;
    const bool with_form = metric == ErrorMetric::form;
    const auto sweeps = run_sweeps(inputs, cfg.n_values, cfg.trials, cfg.seed, Centering::limit,
                                   with_functional, with_form);

    const auto jsonl = artifact(ctx, e, command, ".jsonl");
    fs::remove(jsonl);
    std::vector<SummaryRow> rows;
    for (const auto& s : sweeps) {
      append_records(jsonl, s.records, ctx.provenance());
      rows.push_back(summarize(s, cfg.epsilon, metric));
    }
    write_summary(artifact(ctx, e, command, ".csv"), rows, ctx.provenance());

    // wot <= ||f||_* sot on every trial
    std::size_t duality_failures = 0;
    if (with_functional) {
      const double fnorm = dual_norm(e.ensemble.model(), DualFunctional{inputs.functional});
      for (const auto& s : sweeps) {
        for (const auto& r : s.records) {
          if (*r.sup_error_wot > fnorm * r.sup_error_sot + 1e-10) ++duality_failures;
        }
      }
      ok = ok && duality_failures == 0;
    }

    ctx.out << e.name << (e.degenerate ? "  (degenerate)" : "") << '\n';
    ctx.out << "  " << std::setw(8) << "n" << std::setw(14) << "median" << std::setw(14) << "q10" << std::setw(14)
            << "q90" << (cfg.epsilon ? "     tail_freq" : "") << '\n';
    for (const auto& r : rows) {
      ctx.out << "  " << std::setw(8) << r.n << std::setw(14) << fixed(r.median_error, 5) << std::setw(14)
              << fixed(r.q10, 5) << std::setw(14) << fixed(r.q90, 5);
      if (cfg.epsilon) ctx.out << std::setw(14) << fixed(r.tail_freq, 4);
      ctx.out << '\n';
    }
    if (with_functional) ctx.out << "  duality bound failures: " << duality_failures << '\n';
    if (metric == ErrorMetric::sot && cfg.n_values.size() >= 2) {
      const auto study = path_convergence_study(inputs, cfg.n_values, cfg.seed);
      ctx.out << "  single path: ";
      if (study.degenerate) {
        ctx.out << "degenerate";
      } else {
        ctx.out << "decrease fraction " << fixed(study.decrease_fraction, 3);
        if (study.slope) ctx.out << ", slope " << fixed(*study.slope, 3);
      }
      if (study.conjecture_experiment) ctx.out << "  [conjecture experiment]";
      ctx.out << '\n';
    }
  }
  return ok ? kOk : kViolation;
}

int run_tail_scan(Context& ctx) {
  const auto& cfg = ctx.config();
  for (const auto& e : cfg.ensembles) {
    const auto inputs = resolve_inputs(cfg, e);
    const auto sweeps = run_sweeps(inputs, cfg.n_values, cfg.trials, cfg.seed, Centering::chernoff, false, false);
    const auto scan = analyze_tails(inputs, sweeps, cfg.epsilon);

    const auto jsonl = artifact(ctx, e, "tail-scan", ".jsonl");
    fs::remove(jsonl);
    std::vector<SummaryRow> rows;
    for (const auto& s : sweeps) {
      append_records(jsonl, s.records, ctx.provenance());
      rows.push_back(summarize(s, scan.epsilon));
    }
    write_summary(artifact(ctx, e, "tail-scan", ".csv"), rows, ctx.provenance());

    ctx.out << e.name << "  epsilon=" << fixed(scan.epsilon, 6)
            << (scan.epsilon_calibrated ? " (median at first n)" : "") << '\n';
    for (const auto& r : scan.rows) {
      ctx.out << "  n=" << std::setw(6) << r.n << "  freq=" << std::setw(8) << fixed(r.freq, 4) << "  wilson=["
              << fixed(r.wilson.lo, 4) << ", " << fixed(r.wilson.hi, 4) << "]  chernoff_bias="
              << fixed(r.chernoff_bias, 4) << '\n';
    }
    if (scan.below_resolution) {
      ctx.out << "  below resolution: every tail frequency is zero\n";
    } else {
      if (scan.slope) ctx.out << "  fitted slope " << fixed(*scan.slope, 4);
      if (scan.contract_met) {
        ctx.out << "  contract (slope <= -1.5): " << (*scan.contract_met ? "met" : "NOT met");
      } else {
        ctx.out << "  (outside the estimable regime)";
      }
      ctx.out << '\n';
    }
  }
  return kOk;
}

int run_burkholder(Context& ctx) {
  const auto& cfg = ctx.config();
  for (const auto& e : cfg.ensembles) {
    const auto inputs = resolve_inputs(cfg, e);
    const auto series = burkholder_ratio(inputs, cfg.n_values, cfg.trials, cfg.seed, cfg.horizon, cfg.p_s, cfg.r);
    std::ostringstream csv;
    csv << "# config_hash=" << ctx.loaded.hash << " seed=" << cfg.seed << " schema=" << kOutputSchemaVersion << '\n'
        << "n,lhs,rhs,ratio\n";
    ctx.out << e.name << "  p_s=" << series.p_s << " r=" << series.r << " t=" << series.t << '\n';
    for (const auto& r : series.rows) {
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", r.n, r.lhs, r.rhs, r.ratio);
      csv << line;
      ctx.out << "  n=" << std::setw(4) << r.n << "  E|mu|^r=" << fixed(r.lhs, 5) << "  E(sum|d|^p)^(r/p)="
              << fixed(r.rhs, 5) << "  ratio=" << fixed(r.ratio, 5) << '\n';
    }
    write_text(artifact(ctx, e, "burkholder", ".csv"), csv.str());
    if (series.degenerate) {
      ctx.out << "  degenerate (zero increments)\n";
    } else {
      ctx.out << "  max/median ratio " << fixed(series.max_ratio / series.median_ratio, 4)
              << (series.contract_met ? "  bounded" : "  NOT bounded (max > 3 x median)") << '\n';
    }
  }
  return kOk;
}

int run_chernoff(Context& ctx) {
  const auto& cfg = ctx.config();
  bool ok = true;
  for (const auto& e : cfg.ensembles) {
    const auto inputs = resolve_inputs(cfg, e);
    const auto report = chernoff_conditions_check(e.ensemble, inputs.grid);
    ok = ok && report.passed();
    ctx.out << (report.passed() ? "ok   " : "FAIL ") << e.name << "  |F(0)-I|=" << fixed(report.identity_deviation, 3)
            << "  growth=" << fixed(report.worst_growth_ratio, 6)
            << (report.growth_norm_certified ? "" : " (lower bound)")
            << "  F'(0) err=" << fixed(report.derivative_error_fine, 3) << '\n';
    for (const auto& f : report.failures) ctx.out << "       " << f << '\n';
    for (std::size_t n : cfg.n_values) {
      ctx.out << "       n=" << std::setw(6) << n << "  sup|(F(t/n)^n - e^{tEA})x|="
              << fixed(chernoff_bias(e.ensemble, inputs.x, inputs.grid, n), 6) << '\n';
    }
  }
  return ok ? kOk : kViolation;
}

std::pair<boost::multiprecision::cpp_int, boost::multiprecision::cpp_int> parse_ratio(const std::string& text) {
  using boost::multiprecision::cpp_int;
  auto digits = [&](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw InputError("--u: expected a nonnegative rational such as 3, 0.25 or 1/4");
    }
    return cpp_int(s);
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const cpp_int den = digits(text.substr(slash + 1));
    if (den == 0) throw InputError("--u: zero denominator");
    return {digits(text.substr(0, slash)), den};
  }
  if (const auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    const cpp_int whole = dot == 0 ? cpp_int(0) : digits(text.substr(0, dot));
    const cpp_int den = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(frac.size()));
    return {whole * den + (frac.empty() ? cpp_int(0) : digits(frac)), den};
  }
  return {digits(text), cpp_int(1)};
}

int run_fourth_moment(const Options& options, std::ostream& out) {
  if (options.n < 1) throw InputError("--n must be >= 1");
  const auto [num, den] = parse_ratio(options.u);
  const Rational u(num, den);
  const Rational formula = fourth_moment_formula<Rational>(options.n, u);
  out << "fourth_moment(n=" << options.n << ", u=" << u << ") = " << formula << '\n';
  int code = kOk;
  if (options.n <= kMaxBruteForceN) {
    const bool equal = formula == fourth_moment_bruteforce<Rational>(options.n, u);
    out << "formula==bruteforce: " << (equal ? "true" : "false") << '\n';
    if (!equal) code = kViolation;
  } else {
    out << "formula==bruteforce: skipped (enumeration needs n <= " << kMaxBruteForceN << ")\n";
  }
  if (options.probe) {
    const auto probe = tail_coefficient_probe(options.rho, options.t, {64, 128, 256, 512, 1024});
    out << "tail coefficient probe at rho*t=" << probe.rho_t << ":\n"
        << "  fitted c (value ~ c/n^2) = " << fixed(probe.fitted_coefficient, 8) << "  residual "
        << fixed(probe.residual, 3) << '\n'
        << "  free-exponent slope      = " << fixed(probe.fitted_exponent, 6) << '\n'
        << "  12 rho^2 t^2             = " << fixed(probe.stated_constant, 8)
        << (probe.matches_stated_constant ? "  (agrees)" : "  (disagrees)") << '\n'
        << "  48 rho^4 t^4             = " << fixed(probe.expansion_constant, 8)
        << (probe.matches_expansion_constant ? "  (agrees)" : "  (disagrees)") << '\n';
  }
  return code;
}

int run_report(const Options& options, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& p : options.inputs) files.emplace_back(p);
  if (files.empty()) {
    if (!fs::is_directory(options.output_dir)) throw IoError("no such output directory " + options.output_dir);
    for (const auto& entry : fs::directory_iterator(options.output_dir)) {
      const auto ext = entry.path().extension();
      if (ext == ".jsonl" || ext == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw IoError("report: no output files found");

  std::set<std::string> hashes;
  std::map<fs::path, std::vector<Provenance>> provenance;
  for (const auto& f : files) {
    provenance[f] = read_provenance(f);
    for (const auto& p : provenance[f]) hashes.insert(p.config_hash);
  }
  if (hashes.size() > 1) {
    err << "report: refusing to combine outputs from " << hashes.size() << " different configs:\n";
    for (const auto& [f, ps] : provenance) {
      if (!ps.empty()) err << "  " << ps.front().config_hash.substr(0, 16) << "  " << f.string() << '\n';
    }
    return kConfigInvalid;
  }
  out << "config_hash " << (hashes.empty() ? std::string("(none)") : *hashes.begin()) << '\n';
  for (const auto& f : files) {
    out << f.filename().string();
    if (f.extension() == ".jsonl") {
      const auto file = read_records(f);
      std::map<std::uint64_t, std::vector<double>> by_n;
      for (const auto& r : file.records) by_n[r.n].push_back(r.sup_error_sot);
      out << "  records=" << file.records.size() << '\n';
      for (auto& [n, v] : by_n) {
        out << "  n=" << std::setw(6) << n << "  trials=" << std::setw(6) << v.size() << "  median sup error "
            << fixed(median(v), 6) << '\n';
      }
    } else {
      out << '\n';
    }
  }
  return kOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options options;
  const char* env_dir = std::getenv(kOutputDirEnv);
  options.output_dir = env_dir && *env_dir ? env_dir : kDefaultOutputDir;

  CLI::App app{"Random operator products: identity checks, bounds and convergence experiments", "slln_lab"};
  app.require_subcommand(1);
  app.add_option("-c,--config", options.config_path, "experiment config (JSON)");
  app.add_option("-o,--output-dir", options.output_dir,
                 std::string("artifact directory (default $") + kOutputDirEnv + " or " + kDefaultOutputDir + ")");
  app.add_option("--seed", options.seed, "override the config seed");
  app.add_flag("-v,--verbose", options.verbose, "more detail");
  app.add_option("--workers", options.workers, "OpenMP worker count (0 = default)")->check(CLI::NonNegativeNumber);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify-identities", "expansion identity, martingale property and expectation lemmas"},
      {"check-bounds", "seeded random checks of the explicit norm bounds"},
      {"run-sot", "strong-operator sup errors over n"},
      {"run-wot", "weak-operator sup errors over n"},
      {"run-form", "seminorm sup errors over n"},
      {"tail-scan", "tail frequencies of the martingale part with a log-log rate fit"},
      {"burkholder", "Monte Carlo Burkholder ratio over n"},
      {"fourth-moment", "closed form against brute-force enumeration"},
      {"chernoff", "Chernoff conditions and the deterministic bias"},
      {"report", "summarize output files (refuses mixed config hashes)"},
  };
  std::map<std::string, CLI::App*> sub;
  for (const auto& [name, help] : commands) sub[name] = app.add_subcommand(name, help)->fallthrough();
  sub["fourth-moment"]->add_option("--n", options.n, "number of indices")->required();
  sub["fourth-moment"]->add_option("--u", options.u, "weight u >= 0: integer, decimal or a/b")->required();
  sub["fourth-moment"]->add_flag("--probe", options.probe, "fit the n^-2 tail coefficient at u = 2 rho t / n");
  sub["fourth-moment"]->add_option("--rho", options.rho, "rho for --probe");
  sub["fourth-moment"]->add_option("--t", options.t, "t for --probe");
  sub["report"]->add_option("files", options.inputs, "output files (default: every file in the output dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  }

  kernels::set_default_workers(options.workers);
  std::string command;
  for (const auto& [name, app_ptr] : sub) {
    if (app_ptr->parsed()) command = name;
  }

  try {
    if (command == "fourth-moment") return run_fourth_moment(options, out);
    if (command == "report") return run_report(options, out, err);

    if (options.config_path.empty()) {
      err << command << ": --config is required\n";
      return kConfigInvalid;
    }
    Context ctx{options, load_config(options.config_path), {}, out};
    if (options.seed) override_seed(ctx.loaded, *options.seed);
    ctx.output_dir = prepare_output_dir(options.output_dir);
    if (options.verbose) {
      out << "config " << options.config_path << "  hash " << ctx.loaded.hash << "  seed " << ctx.config().seed
          << "  ensembles " << ctx.config().ensembles.size() << '\n';
    }

    if (command == "verify-identities") return verify_identities(ctx);
    if (command == "check-bounds") return check_bounds(ctx);
    if (command == "run-sot") return run_errors(ctx, command, ErrorMetric::sot);
    if (command == "run-wot") return run_errors(ctx, command, ErrorMetric::wot);
    if (command == "run-form") return run_errors(ctx, command, ErrorMetric::form);
    if (command == "tail-scan") return run_tail_scan(ctx);
    if (command == "burkholder") return run_burkholder(ctx);
    if (command == "chernoff") return run_chernoff(ctx);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kConfigInvalid;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const FormInvariantError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kToolFailure;
  }
  err << "unknown subcommand\n";
  return kUsage;
}

}  // namespace slln::cli
