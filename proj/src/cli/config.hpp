#ifndef VNSMEAR_CLI_CONFIG_HPP
#define VNSMEAR_CLI_CONFIG_HPP

#include <vnsmear/smear.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vnsmear::cli {

/// A configuration problem, addressed by dotted field name and source line
/// (1-based; 0 when there is no meaningful line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string origin, int line, std::string field, const std::string& message)
      : std::runtime_error(format(origin, line, field, message)),
        origin_(std::move(origin)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& origin() const { return origin_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& origin, int line, const std::string& field, const std::string& msg) {
    std::string out = origin;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + field + ": " + msg;
  }

  std::string origin_;
  int line_;
  std::string field_;
};

enum class Format { Csv, Report, Bin };

const char* to_string(Format f);
Format parse_format(const std::string& text);

struct GridSpec {
  double x_min = -12;
  double x_max = 12;
  Index n = 512;
};

struct WaveSpec {
  std::string type = "gaussian";
  std::optional<double> s;
  double x0 = 0;
  double p0 = 0;
};

struct ChannelSpec {
  std::optional<double> sigma;
  Convention convention = Convention::TracePreserving;
};

struct AnalysisFlags {
  bool widths = true;
  bool purity = true;
  bool entropy = true;
  bool momentum = true;
  bool classify = true;
  bool classical = true;
};

struct ClassifySpec {
  double ref_x = 1;
  double ref_p = 1;
  double factor = 3;
};

struct ClassicalSpec {
  double sigma_si = 1e-6;  // m
  double ratio = 3;        // N = sigma / s
  double velocity = 1e-6;  // m/s, for the proton comparison
};

struct SweepSpec {
  std::vector<double> s;
  std::vector<double> sigma;
  Index n = 512;
};

struct OutputSpec {
  std::string path;
  std::optional<Format> format;
};

struct RunConfig {
  std::string origin = "<defaults>";
  GridSpec grid;
  WaveSpec wavefunction;
  ChannelSpec channel;
  AnalysisFlags analysis;
  ClassifySpec classify;
  ClassicalSpec classical;
  SweepSpec sweep;
  OutputSpec output;
  bool has_sweep = false;
  /// Source line of every key seen, by dotted name.
  std::map<std::string, int> lines;

  /// Line of `field`, falling back to its closest recorded parent.
  int line_of(std::string field) const;
};

/// Parses YAML text. Unknown keys, wrong types and out-of-range values are
/// reported as ConfigError with the offending line.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

enum class Mode { Simulate, Sweep, Classify };

/// Cross-field checks for a given command (required fields, sweep lists).
void validate(const RunConfig& cfg, Mode mode);

}  // namespace vnsmear::cli

#endif  // VNSMEAR_CLI_CONFIG_HPP
