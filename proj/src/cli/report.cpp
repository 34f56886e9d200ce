#include "cli/commands.hpp"

#include <cstdio>
#include <ostream>

namespace vnsmear::cli {

namespace {

// Fixed formatting keeps output byte-identical across runs and platforms.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

std::string row_label(const PointResult& r) { return r.regime ? to_string(r.regime->row) : "none"; }

std::string pattern(const SpreadPattern& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + std::string(to_string(p[i]));
  return out;
}

void widths_block(std::ostream& out, const char* name, const SectionalWidths& w) {
  out << name << ":\n"
      << "  x_diag: " << num(w.x_diag) << "\n"
      << "  x_anti: " << num(w.x_anti) << "\n"
      << "  p_diag: " << num(w.p_diag) << "\n"
      << "  p_anti: " << num(w.p_anti) << "\n"
      << "  prod1: " << num(w.product_diag()) << "\n"
      << "  prod2: " << num(w.product_anti()) << "\n";
}

void point_block(std::ostream& out, const PointResult& r) {
  out << "s: " << num(r.s) << "\n"
      << "sigma: " << num(r.sigma) << "\n"
      << "trace: " << num(r.trace) << "\n"
      << "purity: " << num(r.purity) << "\n"
      << "entropy: " << num(r.entropy) << "\n";
  widths_block(out, "widths", r.widths);
  if (r.analytic) {
    widths_block(out, "analytic_widths", *r.analytic);
    out << "purity_closed_form: " << num(gaussian_purity(r.s, r.sigma)) << "\n";
  }
  if (r.regime) {
    out << "regime: " << to_string(r.regime->row) << "\n"
        << "regime_pattern: " << pattern(r.regime->pattern) << "\n"
        << "regime_description: " << describe(r.regime->row) << "\n";
  } else {
    out << "regime: none\n";
  }
  if (r.coarse) {
    out << "coarse_graining:\n"
        << "  cell_mass: " << num(r.coarse->cell_mass) << "\n"
        << "  bin_scale: " << num(r.coarse->bin_scale) << "\n"
        << "  bin_consistency: " << num(r.coarse->bin_consistency) << "\n";
  }
}

}  // namespace

void write_header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# vnsmear " << VNSMEAR_VERSION << " " << command << "\n"
      << "# config: " << cfg.origin << "\n"
      << "# units: hbar = 1\n"
      << "# convention: " << to_string(cfg.channel.convention) << "\n"
      << "# transform: rho_p = U W^1/2 rho W^1/2 U^dagger / dp\n";
  if (command == "sweep") {
    out << "# sweep.s: " << list(cfg.sweep.s) << "\n"
        << "# sweep.sigma: " << list(cfg.sweep.sigma) << "\n"
        << "# sweep.n: " << cfg.sweep.n << "\n"
        << "# sweep.grid: +-10*max(s, sigma)\n";
  } else {
    out << "# grid: [" << num(cfg.grid.x_min) << ", " << num(cfg.grid.x_max) << "] n = " << cfg.grid.n << "\n"
        << "# wavefunction: " << cfg.wavefunction.type << " s = " << num(cfg.wavefunction.s.value_or(0))
        << " x0 = " << num(cfg.wavefunction.x0) << " p0 = " << num(cfg.wavefunction.p0) << "\n"
        << "# channel.sigma: " << num(cfg.channel.sigma.value_or(0)) << "\n";
  }
  out << "# classify: ref_x = " << num(cfg.classify.ref_x) << " ref_p = " << num(cfg.classify.ref_p)
      << " factor = " << num(cfg.classify.factor) << "\n";
}

void write_simulation_report(std::ostream& out, const Simulation& sim) {
  point_block(out, sim.point);
  out << "warnings:";
  if (sim.warnings.empty()) out << " []";
  out << "\n";
  for (const auto& w : sim.warnings) out << "  - " << w << "\n";
}

void write_sweep_csv(std::ostream& out, const std::vector<PointResult>& rows) {
  out << "s,sigma,trace,purity,entropy,w_x_diag,w_x_anti,w_p_diag,w_p_anti,prod1,prod2,regime\n";
  for (const auto& r : rows) {
    const auto& w = r.widths;
    out << num(r.s) << "," << num(r.sigma) << "," << num(r.trace) << "," << num(r.purity) << "," << num(r.entropy)
        << "," << num(w.x_diag) << "," << num(w.x_anti) << "," << num(w.p_diag) << "," << num(w.p_anti) << ","
        << num(w.product_diag()) << "," << num(w.product_anti()) << "," << row_label(r) << "\n";
  }
}

void write_sweep_report(std::ostream& out, const std::vector<PointResult>& rows) {
  out << "points: " << rows.size() << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "---\n"
        << "index: " << i << "\n";
    point_block(out, rows[i]);
  }
}

void write_checks(std::ostream& out, const std::vector<Check>& checks) {
  int failed = 0;
  for (const auto& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s deviation %-12.4e threshold %-10.3g %s\n", c.name.c_str(), c.deviation,
                  c.threshold, c.pass() ? "PASS" : "FAIL");
    out << line;
    failed += !c.pass();
  }
  out << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
}

void write_classify(std::ostream& out, const RegimeReport& r, const ClassifySpec& spec) {
  out << "s: " << num(r.s) << "\n"
      << "sigma: " << num(r.sigma) << "\n"
      << "ref_x: " << num(spec.ref_x) << "\n"
      << "ref_p: " << num(spec.ref_p) << "\n"
      << "factor: " << num(spec.factor) << "\n";
  widths_block(out, "analytic_widths", r.widths);
  out << "pattern: " << pattern(r.pattern) << "\n"
      << "regime: " << to_string(r.row) << "\n"
      << "description: " << describe(r.row) << "\n";
}

void write_classical(std::ostream& out, const ClassicalSummary& c) {
  out << "sigma_si: " << num(c.sigma_si) << " m\n"
      << "N: " << num(c.ratio) << "\n"
      << "momentum_bin_scale: " << num(c.bin_scale_si) << " kg m/s\n"
      << "cell_mass: " << num(c.cell_mass) << "  (s = sigma/N, width-sigma cell; erf value " << num(c.cell_mass_erf)
      << ")\n"
      << "commentary: the bin scale equals the momentum of " << num(c.protons) << " protons at "
      << num(c.velocity) << " m/s\n";
}

void write_povm_trial(std::ostream& out, const PovmTrial& t, bool verbose) {
  out << "seed " << t.seed << " dim_s " << t.dim_s << " dim_a " << t.dim_a << " unitary "
      << (t.identity ? "identity" : "random") << ": " << (t.pass() ? "PASS" : "FAIL");
  if (!t.error.empty()) out << " (" << t.error << ")";
  out << "\n";
  if (!verbose) return;
  for (std::size_t i = 0; i < t.effects.size(); ++i) {
    out << "E_" << i << ":\n";
    const auto& e = t.effects[i];
    for (Index r = 0; r < e.rows(); ++r) {
      out << " ";
      for (Index c = 0; c < e.cols(); ++c) {
        char cell[64];
        std::snprintf(cell, sizeof cell, " %+.8f%+.8fi", e(r, c).real(), e(r, c).imag());
        out << cell;
      }
      out << "\n";
    }
  }
  out << "hermiticity: " << num(t.hermiticity) << "\n"
      << "min_eigenvalue: " << num(t.min_eigenvalue) << "\n"
      << "completeness: " << num(t.completeness) << "\n"
      << "probability_gap: " << num(t.probability_gap) << "\n"
      << "projective: " << (t.projective ? "true" : "false") << "\n";
}

}  // namespace vnsmear::cli
