#include "cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace vnsmear::cli {

const char* to_string(Format f) {
  switch (f) {
    case Format::Csv: return "csv";
    case Format::Report: return "report";
    case Format::Bin: return "bin";
  }
  return "?";
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "report") return Format::Report;
  if (text == "bin") return Format::Bin;
  throw std::invalid_argument("unknown format '" + text + "' (expected csv, report or bin)");
}

int RunConfig::line_of(std::string field) const {
  while (true) {
    if (auto it = lines.find(field); it != lines.end()) return it->second;
    const auto dot = field.rfind('.');
    if (dot == std::string::npos) return 0;
    field.resize(dot);
  }
}

namespace {

class Reader {
 public:
  Reader(RunConfig& cfg) : cfg_(cfg) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    const int line = node.IsDefined() ? node.Mark().line + 1 : cfg_.line_of(field);
    throw ConfigError(cfg_.origin, line, field, msg);
  }

  /// Records line numbers for the keys of `map` and rejects unknown ones.
  void keys(const YAML::Node& map, const std::string& prefix, const std::set<std::string>& allowed) {
    if (!map.IsMap()) fail(map, prefix, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      const auto field = prefix.empty() ? key : prefix + "." + key;
      cfg_.lines[field] = kv.first.Mark().line + 1;
      if (!allowed.count(key)) fail(kv.first, field, "unknown key");
    }
  }

  double real(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    const auto text = node.Scalar();
    if (text == "inf" || text == ".inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    try {
      const double v = node.as<double>();
      if (std::isnan(v)) fail(node, field, "must not be NaN");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(node, field, "expected a number, got '" + text + "'");
    }
  }

  double positive(const YAML::Node& node, const std::string& field, bool allow_inf = false) const {
    const double v = real(node, field);
    if (!(v > 0)) fail(node, field, "must be positive");
    if (!allow_inf && std::isinf(v)) fail(node, field, "must be finite");
    return v;
  }

  double finite(const YAML::Node& node, const std::string& field) const {
    const double v = real(node, field);
    if (!std::isfinite(v)) fail(node, field, "must be finite");
    return v;
  }

  Index count(const YAML::Node& node, const std::string& field, Index min) const {
    if (!node.IsScalar()) fail(node, field, "expected an integer");
    try {
      const auto v = node.as<long long>();
      if (v < min) fail(node, field, "must be at least " + std::to_string(min));
      return static_cast<Index>(v);
    } catch (const YAML::BadConversion&) {
      fail(node, field, "expected an integer, got '" + node.Scalar() + "'");
    }
  }

  bool flag(const YAML::Node& node, const std::string& field) const {
    try {
      return node.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(node, field, "expected true or false");
    }
  }

  std::string text(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a string");
    return node.Scalar();
  }

  std::vector<double> positive_list(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(positive(node[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  RunConfig& cfg_;
};

void read(const YAML::Node& root, RunConfig& cfg) {
  Reader r(cfg);
  if (root.IsNull()) return;
  r.keys(root, "", {"grid", "wavefunction", "channel", "analysis", "classify", "classical", "sweep", "output"});

  if (const auto g = root["grid"]) {
    r.keys(g, "grid", {"x_min", "x_max", "n"});
    if (g["x_min"]) cfg.grid.x_min = r.finite(g["x_min"], "grid.x_min");
    if (g["x_max"]) cfg.grid.x_max = r.finite(g["x_max"], "grid.x_max");
    if (g["n"]) cfg.grid.n = r.count(g["n"], "grid.n", 2);
    if (!(cfg.grid.x_max > cfg.grid.x_min)) r.fail(g, "grid", "x_max must exceed x_min");
  }

  if (const auto w = root["wavefunction"]) {
    r.keys(w, "wavefunction", {"type", "s", "x0", "p0"});
    if (w["type"]) {
      cfg.wavefunction.type = r.text(w["type"], "wavefunction.type");
      if (cfg.wavefunction.type != "gaussian") r.fail(w["type"], "wavefunction.type", "only 'gaussian' is supported");
    }
    if (w["s"]) cfg.wavefunction.s = r.positive(w["s"], "wavefunction.s");
    if (w["x0"]) cfg.wavefunction.x0 = r.finite(w["x0"], "wavefunction.x0");
    if (w["p0"]) cfg.wavefunction.p0 = r.finite(w["p0"], "wavefunction.p0");
  }

  if (const auto c = root["channel"]) {
    r.keys(c, "channel", {"sigma", "convention"});
    if (c["sigma"]) cfg.channel.sigma = r.positive(c["sigma"], "channel.sigma", true);
    if (c["convention"]) {
      const auto conv = r.text(c["convention"], "channel.convention");
      if (conv == "trace_preserving") {
        cfg.channel.convention = Convention::TracePreserving;
      } else if (conv == "paper_prefactor") {
        cfg.channel.convention = Convention::PaperPrefactor;
      } else {
        r.fail(c["convention"], "channel.convention", "expected trace_preserving or paper_prefactor");
      }
    }
  }

  if (const auto a = root["analysis"]) {
    r.keys(a, "analysis", {"widths", "purity", "entropy", "momentum", "classify", "classical"});
    auto& f = cfg.analysis;
    if (a["widths"]) f.widths = r.flag(a["widths"], "analysis.widths");
    if (a["purity"]) f.purity = r.flag(a["purity"], "analysis.purity");
    if (a["entropy"]) f.entropy = r.flag(a["entropy"], "analysis.entropy");
    if (a["momentum"]) f.momentum = r.flag(a["momentum"], "analysis.momentum");
    if (a["classify"]) f.classify = r.flag(a["classify"], "analysis.classify");
    if (a["classical"]) f.classical = r.flag(a["classical"], "analysis.classical");
  }

  if (const auto c = root["classify"]) {
    r.keys(c, "classify", {"ref_x", "ref_p", "factor"});
    if (c["ref_x"]) cfg.classify.ref_x = r.positive(c["ref_x"], "classify.ref_x");
    if (c["ref_p"]) cfg.classify.ref_p = r.positive(c["ref_p"], "classify.ref_p");
    if (c["factor"]) {
      cfg.classify.factor = r.finite(c["factor"], "classify.factor");
      if (cfg.classify.factor < 1) r.fail(c["factor"], "classify.factor", "must be >= 1");
    }
  }

  if (const auto c = root["classical"]) {
    r.keys(c, "classical", {"sigma_si", "N", "velocity"});
    if (c["sigma_si"]) cfg.classical.sigma_si = r.positive(c["sigma_si"], "classical.sigma_si");
    if (c["N"]) cfg.classical.ratio = r.positive(c["N"], "classical.N");
    if (c["velocity"]) cfg.classical.velocity = r.positive(c["velocity"], "classical.velocity");
  }

  if (const auto s = root["sweep"]) {
    r.keys(s, "sweep", {"s", "sigma", "n"});
    cfg.has_sweep = true;
    if (s["s"]) cfg.sweep.s = r.positive_list(s["s"], "sweep.s");
    if (s["sigma"]) cfg.sweep.sigma = r.positive_list(s["sigma"], "sweep.sigma");
    if (s["n"]) cfg.sweep.n = r.count(s["n"], "sweep.n", 16);
  }

  if (const auto o = root["output"]) {
    r.keys(o, "output", {"path", "format"});
    if (o["path"]) cfg.output.path = r.text(o["path"], "output.path");
    if (o["format"]) {
      try {
        cfg.output.format = parse_format(r.text(o["format"], "output.format"));
      } catch (const std::invalid_argument& e) {
        r.fail(o["format"], "output.format", e.what());
      }
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.origin = origin;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin, e.mark.line + 1, "<syntax>", e.msg);
  }
  read(root, cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "--config", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void validate(const RunConfig& cfg, Mode mode) {
  auto require = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(cfg.origin, cfg.line_of(field), field, msg);
  };
  switch (mode) {
    case Mode::Simulate:
      require(cfg.wavefunction.s.has_value(), "wavefunction.s", "missing required field");
      require(cfg.channel.sigma.has_value(), "channel.sigma", "missing required field");
      break;
    case Mode::Classify:
      require(cfg.wavefunction.s.has_value(), "wavefunction.s", "missing required field");
      require(cfg.channel.sigma.has_value(), "channel.sigma", "missing required field");
      require(std::isfinite(*cfg.channel.sigma), "channel.sigma", "must be finite for classification");
      break;
    case Mode::Sweep:
      require(cfg.has_sweep, "sweep", "missing required section");
      require(!cfg.sweep.s.empty(), "sweep.s", "must be a non-empty list");
      require(!cfg.sweep.sigma.empty(), "sweep.sigma", "must be a non-empty list");
      break;
  }
}

}  // namespace vnsmear::cli
