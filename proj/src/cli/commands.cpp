#include "cli/commands.hpp"

#include <vnsmear/classical.hpp>
#include <vnsmear/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace vnsmear::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

DensityMatrix normalized(const DensityMatrix& rho) {
  return DensityMatrix(rho.basis(), rho.grid(), rho.mat() / trace(rho));
}

struct Evaluation {
  PointResult point;
  DensityMatrix rho_x;
  std::optional<DensityMatrix> rho_p;
  std::vector<std::string> notes;
};

/// Shared by simulate and sweep so that a 1x1 sweep reproduces simulate.
Evaluation evaluate(const Grid& g, double s, double sigma, Convention conv, double x0, double p0,
                    const AnalysisFlags& flags, const ClassifySpec& cls, bool measure) {
  const SmearKernel kern(sigma, conv);
  const auto rho_x = apply_smeared_channel(pure_density(gaussian_packet(g, s, x0, p0)), kern);

  PointResult r;
  r.s = s;
  r.sigma = sigma;
  r.trace = trace(rho_x);
  const auto unit = normalized(rho_x);
  r.purity = flags.purity ? purity(unit) : kNaN;
  r.entropy = flags.entropy ? entropy(unit) : kNaN;
  r.widths = {kNaN, kNaN, kNaN, kNaN};

  std::optional<DensityMatrix> rho_p;
  if (flags.momentum || flags.widths) rho_p = to_momentum(rho_x);
  std::vector<std::string> notes;
  if (measure && flags.widths && g.is_symmetric()) {
    // A section that underflows to zero (sigma far below dx) is reported as nan.
    auto width = [&](const DensityMatrix& rho, Section sec, const char* name) {
      try {
        return sectional_width(rho, sec);
      } catch (const std::invalid_argument& e) {
        notes.push_back(std::string(name) + " width not measurable: " + e.what());
        return kNaN;
      }
    };
    r.widths = {width(rho_x, Section::Diagonal, "x_diag"), width(rho_x, Section::AntiDiagonal, "x_anti"),
                width(*rho_p, Section::Diagonal, "p_diag"), width(*rho_p, Section::AntiDiagonal, "p_anti")};
  }

  if (std::isfinite(sigma)) {
    r.analytic = sectional_widths(s, sigma);
    if (flags.classify) r.regime = classify_regime(s, sigma, cls.ref_x, cls.ref_p, cls.factor);
    if (flags.classical) {
      CoarseSummary c{kNaN, std::sqrt(4 + (sigma / s) * (sigma / s)) / sigma, kNaN};
      try {
        c.cell_mass = cell_mass(unit, x0, sigma);
      } catch (const std::invalid_argument&) {
      }
      c.bin_consistency = c.bin_scale / r.widths.p_diag;
      r.coarse = c;
    }
  }
  return {r, rho_x, rho_p, std::move(notes)};
}

}  // namespace

Simulation run_simulate(const RunConfig& cfg) {
  const Grid g(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n);
  const double s = *cfg.wavefunction.s;
  const double sigma = *cfg.channel.sigma;
  const auto& w = cfg.wavefunction;

  std::vector<std::string> warnings;
  if (auto msg = resolution_warning(g, SmearKernel(sigma, cfg.channel.convention))) warnings.push_back(*msg);
  if (w.x0 != 0 || w.p0 != 0) {
    warnings.push_back("packet is off-centre (x0 = " + fmt(w.x0) + ", p0 = " + fmt(w.p0) +
                       "); sectional widths are taken about the origin");
  }
  if (!g.is_symmetric()) warnings.push_back("grid is not symmetric about 0; sectional widths skipped");

  auto e = evaluate(g, s, sigma, cfg.channel.convention, w.x0, w.p0, cfg.analysis, cfg.classify, true);
  warnings.insert(warnings.end(), e.notes.begin(), e.notes.end());
  return {e.point, std::move(e.rho_x), std::move(e.rho_p), std::move(warnings)};
}

Grid sweep_grid(double s, double sigma, Index n) {
  const double half = 10 * std::max(s, sigma);
  return make_grid(-half, half, n);
}

std::vector<PointResult> run_sweep(const RunConfig& cfg, unsigned threads, std::vector<std::string>& warnings) {
  struct Job {
    double s;
    double sigma;
  };
  std::vector<Job> jobs;
  for (double s : cfg.sweep.s)
    for (double sigma : cfg.sweep.sigma) jobs.push_back({s, sigma});

  std::vector<PointResult> rows(jobs.size());
  std::vector<std::string> notes(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto [s, sigma] = jobs[i];
      try {
        const Grid g = sweep_grid(s, sigma, cfg.sweep.n);
        const bool resolved = sectional_widths(s, sigma).x_anti >= 2 * g.spacing();
        if (resolved) {
          rows[i] = evaluate(g, s, sigma, cfg.channel.convention, 0, 0, cfg.analysis, cfg.classify, true).point;
        } else {
          PointResult r;
          r.s = s;
          r.sigma = sigma;
          r.trace = r.purity = r.entropy = kNaN;
          r.widths = {kNaN, kNaN, kNaN, kNaN};
          r.analytic = sectional_widths(s, sigma);
          r.regime = classify_regime(s, sigma, cfg.classify.ref_x, cfg.classify.ref_p, cfg.classify.factor);
          rows[i] = r;
          notes[i] = "s = " + fmt(s) + ", sigma = " + fmt(sigma) + ": anti-diagonal width below 2*dx on the " +
                     std::to_string(cfg.sweep.n) + "-point grid; measured columns left as nan";
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep point s = " + fmt(jobs[i].s) + ", sigma = " + fmt(jobs[i].sigma) + ": " +
                               e.what());
    }
  }
  for (auto& n : notes)
    if (!n.empty()) warnings.push_back(std::move(n));
  return rows;
}

std::vector<Check> run_validation() {
  std::vector<Check> checks;
  const GridSpec def;
  const Grid g(def.x_min, def.x_max, def.n);
  const double s = 1;
  const double sigma = 1;

  const auto pure = pure_density(gaussian_packet(g, s));
  const auto rho_x = apply_smeared_channel(pure, SmearKernel(sigma));
  checks.push_back({"closed_form_x", max_relative_deviation(rho_x.mat(), gaussian_closed_form_x(g, s, sigma).mat()),
                    1e-8});
  const auto rho_p = to_momentum(rho_x, TransformMethod::Direct);
  checks.push_back({"closed_form_p", max_relative_deviation(rho_p.mat(), gaussian_closed_form_p(g, s, sigma).mat()),
                    1e-6});
  checks.push_back({"fft_vs_direct",
                    max_relative_deviation(to_momentum(rho_x, TransformMethod::Fast).mat(), rho_p.mat()), 1e-8});
  checks.push_back({"roundtrip", max_relative_deviation(to_position(rho_p).mat(), rho_x.mat()), 1e-10});

  double purity_gap = 0;
  for (double si : {0.5, 1.0, 2.0}) {
    for (double sg : {0.5, 1.0, 2.0}) {
      const Grid gi = sweep_grid(si, sg, 512);
      const auto r = apply_smeared_channel(pure_density(gaussian_packet(gi, si)), SmearKernel(sg));
      purity_gap = std::max(purity_gap, std::abs(purity(r) - gaussian_purity(si, sg)));
    }
  }
  checks.push_back({"purity_law", purity_gap, 1e-4});

  const auto two = apply_smeared_channel(apply_smeared_channel(pure, SmearKernel(1.0)), SmearKernel(2.0));
  const auto one = apply_smeared_channel(pure, SmearKernel(composed_sigma(1.0, 2.0)));
  checks.push_back({"composition", (two.mat() - one.mat()).cwiseAbs().maxCoeff(), 1e-10});

  const auto tiny = apply_smeared_channel(pure, SmearKernel(g.spacing() / 10));
  checks.push_back({"sigma0_offdiagonal", offdiagonal_suppression(pure, tiny, 3), 1e-3});
  checks.push_back({"sigma0_momentum_lines", difference_line_variation(to_momentum(tiny), 64), 1e-2});

  const auto w = measured_widths(rho_x, rho_p);
  checks.push_back({"width_product_diag", std::abs(w.product_diag() / 0.5 - 1), 0.02});
  checks.push_back({"width_product_anti", std::abs(w.product_anti() / 0.5 - 1), 0.02});

  int mismatched = 0;
  for (auto [si, sg, row] : {std::tuple{100.0, 0.01, Regime::SigmaSmallSLarge},
                             std::tuple{0.01, 0.01, Regime::SigmaSmallSSmall},
                             std::tuple{0.01, 100.0, Regime::SigmaLargeSSmall},
                             std::tuple{100.0, 100.0, Regime::SigmaLargeSLarge}}) {
    if (classify_regime(si, sg, 1.0, 1.0).row != row) ++mismatched;
  }
  checks.push_back({"table_rows", double(mismatched), 0.5});
  return checks;
}

ClassicalSummary run_classical(const ClassicalSpec& spec) {
  const CoarseGraining cg(spec.sigma_si, spec.ratio);
  ClassicalSummary c{};
  c.sigma_si = spec.sigma_si;
  c.ratio = spec.ratio;
  c.velocity = spec.velocity;
  c.bin_scale_si = momentum_bin_scale(cg);
  c.protons = proton_equivalent(c.bin_scale_si, spec.velocity);
  // Dimensionless: s = 1, cell width N.
  const Grid g = sweep_grid(1.0, spec.ratio, 4097);
  c.cell_mass = cell_mass(gaussian_packet(g, 1.0), 0.0, spec.ratio);
  c.cell_mass_erf = std::erf(spec.ratio / (2 * std::numbers::sqrt2));
  return c;
}

bool PovmTrial::pass() const {
  return error.empty() && hermiticity <= tol::kAlgebra && min_eigenvalue >= -tol::kAlgebra &&
         completeness <= tol::kAlgebra && probability_gap <= tol::kAlgebra;
}

PovmTrial run_povm_trial(Index dim_s, Index dim_a, std::uint64_t seed, bool identity) {
  if (dim_s < 2 || dim_s > 4 || dim_a < 2 || dim_a > 4) {
    throw std::invalid_argument("povm-demo: dimensions must lie in 2..4");
  }
  std::mt19937_64 rng(seed);
  PovmTrial t{seed, dim_s, dim_a, identity, {}, {}, {}, {}};
  const Index d = dim_s * dim_a;
  if (identity) {
    t.unitary = ComplexMatrix<double>::Identity(d, d);
    t.alpha = ComplexVector<double>::Unit(dim_a, 0);
  } else {
    t.unitary = random_unitary<double>(d, rng);
    t.alpha = random_unit_vector<double>(dim_a, rng);
  }
  const ComplexMatrix<double> sys = ComplexMatrix<double>::Identity(dim_s, dim_s);
  const ComplexMatrix<double> anc = ComplexMatrix<double>::Identity(dim_a, dim_a);
  try {
    const Povm povm = povm_from_ancilla(t.unitary, t.alpha, sys, anc);
    t.effects = povm.effects();
    ComplexMatrix<double> sum = ComplexMatrix<double>::Zero(dim_s, dim_s);
    t.min_eigenvalue = std::numeric_limits<double>::infinity();
    t.projective = true;
    for (const auto& e : t.effects) {
      t.hermiticity = std::max(t.hermiticity, (e - e.adjoint()).cwiseAbs().maxCoeff());
      t.min_eigenvalue = std::min(t.min_eigenvalue, detail::min_hermitian_eigenvalue(e));
      if ((e * e - e).cwiseAbs().maxCoeff() > tol::kAlgebra) t.projective = false;
      sum += e;
    }
    t.completeness = detail::unit_deviation(sum);
    for (int k = 0; k < 5; ++k) {
      const auto rho = random_mixed_state<double>(dim_s, rng);
      const auto a = povm.probabilities(rho);
      const auto b = joint_projective_probabilities(t.unitary, t.alpha, sys, anc, rho);
      for (std::size_t i = 0; i < a.size(); ++i) t.probability_gap = std::max(t.probability_gap, std::abs(a[i] - b[i]));
    }
  } catch (const std::invalid_argument& e) {
    t.error = e.what();
  }
  return t;
}

// ---------------------------------------------------------------------------
// Command-line driver

namespace {

struct Globals {
  std::string config;
  std::string output;
  std::string format;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

RunConfig load(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (!g.output.empty()) cfg.output.path = g.output;
  if (!g.format.empty()) {
    try {
      cfg.output.format = parse_format(g.format);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("<command line>", 0, "--format", e.what());
    }
  }
  return cfg;
}

Format pick_format(const RunConfig& cfg, Format fallback, std::initializer_list<Format> allowed,
                   const std::string& command) {
  const Format f = cfg.output.format.value_or(fallback);
  if (std::find(allowed.begin(), allowed.end(), f) == allowed.end()) {
    throw ConfigError(cfg.origin, cfg.line_of("output.format"), "output.format",
                      std::string("format '") + to_string(f) + "' is not available for " + command);
  }
  return f;
}

/// Writes to --output if set, otherwise to `out`.
template <typename Fn>
void emit(const RunConfig& cfg, std::ostream& out, Fn&& fn) {
  if (cfg.output.path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(cfg.output.path, std::ios::binary);
  if (!file) throw ConfigError("<command line>", 0, "output.path", "cannot open '" + cfg.output.path + "'");
  fn(file);
}

void dump(const std::string& path, const DensityMatrix& rho) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  io::write_matrix(file, rho);
}

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smeared von Neumann measurement simulator", "vnsmear"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", VNSMEAR_VERSION);

  Globals g;
  app.add_option("--config", g.config, "YAML run configuration");
  app.add_option("--output", g.output, "Output file (stdout if omitted); prefix for bin dumps");
  app.add_option("--format", g.format, "csv | report | bin");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--threads", g.threads, "Worker threads for sweep (0 = hardware)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Run one (s, sigma) point on the configured grid");
  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate an s x sigma grid of points");
  auto* validate_cmd = app.add_subcommand("validate", "Run the closed-form cross-checks");

  auto* classify_cmd = app.add_subcommand("classify", "Name the regime of an (s, sigma) pair");
  std::optional<double> cl_s, cl_sigma, cl_ref_x, cl_ref_p, cl_factor;
  classify_cmd->add_option("--s", cl_s, "Packet width");
  classify_cmd->add_option("--sigma", cl_sigma, "Smearing width");
  classify_cmd->add_option("--ref-x", cl_ref_x, "Position reference scale");
  classify_cmd->add_option("--ref-p", cl_ref_p, "Momentum reference scale");
  classify_cmd->add_option("--factor", cl_factor, "Spread/localized factor");

  auto* classical_cmd = app.add_subcommand("classical", "SI coarse-graining estimates");
  std::optional<double> c_sigma, c_ratio, c_velocity;
  classical_cmd->add_option("--sigma-si", c_sigma, "Cell size sigma in metres");
  classical_cmd->add_option("--ratio", c_ratio, "N = sigma / s");
  classical_cmd->add_option("--velocity", c_velocity, "Velocity for the proton comparison, m/s");

  auto* povm_cmd = app.add_subcommand("povm-demo", "Ancilla construction of a POVM");
  Index dim_s = 2;
  Index dim_a = 2;
  std::string unitary = "random";
  int trials = 1;
  povm_cmd->add_option("--dim-s", dim_s, "System dimension (2..4)");
  povm_cmd->add_option("--dim-a", dim_a, "Ancilla dimension (2..4)");
  povm_cmd->add_option("--unitary", unitary, "random | identity")->check(CLI::IsMember({"random", "identity"}));
  povm_cmd->add_option("--trials", trials, "Consecutive seeds to run")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load(g);
    const unsigned threads = g.threads ? g.threads : std::max(1u, std::thread::hardware_concurrency());

    if (simulate_cmd->parsed()) {
      validate(cfg, Mode::Simulate);
      const Format f = pick_format(cfg, Format::Report, {Format::Report, Format::Csv, Format::Bin}, "simulate");
      if (f == Format::Bin && cfg.output.path.empty()) {
        throw ConfigError(cfg.origin, 0, "output.path", "bin format needs --output as the file prefix");
      }
      const auto sim = run_simulate(cfg);
      warn_all(err, sim.warnings);
      if (f == Format::Bin) {
        dump(cfg.output.path + "_x.bin", sim.rho_x);
        if (sim.rho_p) dump(cfg.output.path + "_p.bin", *sim.rho_p);
        write_header(out, "simulate", cfg);
        write_simulation_report(out, sim);
      } else {
        emit(cfg, out, [&](std::ostream& os) {
          write_header(os, "simulate", cfg);
          if (f == Format::Csv) {
            write_sweep_csv(os, {sim.point});
          } else {
            write_simulation_report(os, sim);
          }
        });
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      validate(cfg, Mode::Sweep);
      const Format f = pick_format(cfg, Format::Csv, {Format::Csv, Format::Report}, "sweep");
      std::vector<std::string> warnings;
      const auto rows = run_sweep(cfg, threads, warnings);
      warn_all(err, warnings);
      emit(cfg, out, [&](std::ostream& os) {
        write_header(os, "sweep", cfg);
        if (f == Format::Csv) {
          write_sweep_csv(os, rows);
        } else {
          write_sweep_report(os, rows);
        }
      });
      return 0;
    }
    if (validate_cmd->parsed()) {
      pick_format(cfg, Format::Report, {Format::Report}, "validate");
      const auto checks = run_validation();
      emit(cfg, out, [&](std::ostream& os) { write_checks(os, checks); });
      return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); }) ? 0 : 1;
    }
    if (classify_cmd->parsed()) {
      pick_format(cfg, Format::Report, {Format::Report}, "classify");
      if (cl_s) cfg.wavefunction.s = *cl_s;
      if (cl_sigma) cfg.channel.sigma = *cl_sigma;
      if (cl_ref_x) cfg.classify.ref_x = *cl_ref_x;
      if (cl_ref_p) cfg.classify.ref_p = *cl_ref_p;
      if (cl_factor) cfg.classify.factor = *cl_factor;
      if (cl_s && !(*cl_s > 0 && std::isfinite(*cl_s))) throw ConfigError("<command line>", 0, "--s", "must be positive");
      if (cl_sigma && !(*cl_sigma > 0)) throw ConfigError("<command line>", 0, "--sigma", "must be positive");
      if (!(cfg.classify.ref_x > 0)) throw ConfigError("<command line>", 0, "--ref-x", "must be positive");
      if (!(cfg.classify.ref_p > 0)) throw ConfigError("<command line>", 0, "--ref-p", "must be positive");
      if (!(cfg.classify.factor >= 1)) throw ConfigError("<command line>", 0, "--factor", "must be >= 1");
      validate(cfg, Mode::Classify);
      const auto r = classify_regime(*cfg.wavefunction.s, *cfg.channel.sigma, cfg.classify.ref_x, cfg.classify.ref_p,
                                     cfg.classify.factor);
      emit(cfg, out, [&](std::ostream& os) { write_classify(os, r, cfg.classify); });
      return 0;
    }
    if (classical_cmd->parsed()) {
      pick_format(cfg, Format::Report, {Format::Report}, "classical");
      if (c_sigma) cfg.classical.sigma_si = *c_sigma;
      if (c_ratio) cfg.classical.ratio = *c_ratio;
      if (c_velocity) cfg.classical.velocity = *c_velocity;
      const auto& spec = cfg.classical;
      if (!(spec.sigma_si > 0 && std::isfinite(spec.sigma_si))) {
        throw ConfigError("<command line>", 0, "--sigma-si", "must be positive");
      }
      if (!(spec.ratio > 0 && std::isfinite(spec.ratio))) throw ConfigError("<command line>", 0, "--ratio", "must be positive");
      if (!(spec.velocity > 0 && std::isfinite(spec.velocity))) {
        throw ConfigError("<command line>", 0, "--velocity", "must be positive");
      }
      const auto c = run_classical(spec);
      emit(cfg, out, [&](std::ostream& os) { write_classical(os, c); });
      return 0;
    }
    if (povm_cmd->parsed()) {
      pick_format(cfg, Format::Report, {Format::Report}, "povm-demo");
      if (dim_s < 2 || dim_s > 4) throw ConfigError("<command line>", 0, "--dim-s", "must lie in 2..4");
      if (dim_a < 2 || dim_a > 4) throw ConfigError("<command line>", 0, "--dim-a", "must lie in 2..4");
      int passed = 0;
      std::ostringstream body;
      for (int k = 0; k < trials; ++k) {
        const auto t = run_povm_trial(dim_s, dim_a, g.seed + static_cast<std::uint64_t>(k), unitary == "identity");
        write_povm_trial(body, t, trials == 1);
        passed += t.pass();
      }
      emit(cfg, out, [&](std::ostream& os) {
        os << body.str();
        os << "summary: " << passed << "/" << trials << " trials passed\n";
      });
      return passed == trials ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vnsmear::cli
