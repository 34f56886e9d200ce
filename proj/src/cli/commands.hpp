#ifndef VNSMEAR_CLI_COMMANDS_HPP
#define VNSMEAR_CLI_COMMANDS_HPP

#include "cli/config.hpp"

#include <vnsmear/measure.hpp>
#include <vnsmear/smear.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vnsmear::cli {

/// Channel-side extras reported by `simulate`.
struct CoarseSummary {
  double cell_mass;        // probability in a width-sigma cell about x0 (nan if the cell leaves the grid)
  double bin_scale;        // sqrt(4 + N^2) / sigma, hbar = 1
  double bin_consistency;  // bin_scale / measured p-diagonal width
};

/// One (s, sigma) evaluation. Measured quantities are nan when skipped.
struct PointResult {
  double s = 0;
  double sigma = 0;
  double trace = 0;
  double purity = 0;
  double entropy = 0;
  SectionalWidths widths{};
  std::optional<SectionalWidths> analytic;
  std::optional<RegimeReport> regime;
  std::optional<CoarseSummary> coarse;
};

struct Simulation {
  PointResult point;
  DensityMatrix rho_x;
  std::optional<DensityMatrix> rho_p;
  std::vector<std::string> warnings;
};

/// Full pipeline on the configured grid: packet, channel, transform, diagnostics.
Simulation run_simulate(const RunConfig& cfg);

/// Grid used for one sweep point: +-10 max(s, sigma) with sweep.n points.
Grid sweep_grid(double s, double sigma, Index n);

/// All (s, sigma) pairs in s-major order. Points whose anti-diagonal width is
/// below two grid spacings get nan measured columns; the regime is analytic and
/// always filled. Warnings are appended to `warnings` in row order.
std::vector<PointResult> run_sweep(const RunConfig& cfg, unsigned threads, std::vector<std::string>& warnings);

struct Check {
  std::string name;
  double deviation;
  double threshold;
  bool pass() const { return deviation < threshold; }
};

std::vector<Check> run_validation();

struct ClassicalSummary {
  double sigma_si;
  double ratio;
  double velocity;
  double bin_scale_si;
  double protons;
  double cell_mass;       // numerical, width-sigma cell, s = sigma / N
  double cell_mass_erf;   // erf(N / (2 sqrt 2))
};

ClassicalSummary run_classical(const ClassicalSpec& spec);

struct PovmTrial {
  std::uint64_t seed;
  Index dim_s;
  Index dim_a;
  bool identity;
  ComplexMatrix<double> unitary;
  ComplexVector<double> alpha;
  std::vector<ComplexMatrix<double>> effects;
  std::string error;              // non-empty when the Povm invariants failed
  double hermiticity = 0;         // max |E - E^†|
  double min_eigenvalue = 0;      // min over effects
  double completeness = 0;        // max |sum E - 1|
  double probability_gap = 0;     // max |Tr(E rho) - joint route| over test states
  bool projective = false;
  bool pass() const;
};

PovmTrial run_povm_trial(Index dim_s, Index dim_a, std::uint64_t seed, bool identity);

/// Entry point for the `vnsmear` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Writers (report.cpp).
void write_header(std::ostream& out, const std::string& command, const RunConfig& cfg);
void write_simulation_report(std::ostream& out, const Simulation& sim);
void write_sweep_csv(std::ostream& out, const std::vector<PointResult>& rows);
void write_sweep_report(std::ostream& out, const std::vector<PointResult>& rows);
void write_checks(std::ostream& out, const std::vector<Check>& checks);
void write_classify(std::ostream& out, const RegimeReport& r, const ClassifySpec& spec);
void write_classical(std::ostream& out, const ClassicalSummary& c);
void write_povm_trial(std::ostream& out, const PovmTrial& t, bool verbose);

}  // namespace vnsmear::cli

#endif  // VNSMEAR_CLI_COMMANDS_HPP
