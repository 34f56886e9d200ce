#include "cli/commands.hpp"

#include <vnsmear/io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace vnsmear;
using namespace vnsmear::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vnsmear");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vnsmear_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text = "") const {
    const auto p = (dir_ / name).string();
    if (!text.empty()) std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  fs::path dir_;
};

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  return rows;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = parse_config(
      "grid: {x_min: -8, x_max: 8, n: 128}\n"
      "wavefunction: {s: 0.5, x0: 1}\n"
      "channel: {sigma: inf, convention: paper_prefactor}\n");
  EXPECT_EQ(cfg.grid.n, 128);
  EXPECT_DOUBLE_EQ(*cfg.wavefunction.s, 0.5);
  EXPECT_DOUBLE_EQ(cfg.wavefunction.x0, 1);
  EXPECT_TRUE(std::isinf(*cfg.channel.sigma));
  EXPECT_EQ(cfg.channel.convention, Convention::PaperPrefactor);
  EXPECT_TRUE(cfg.analysis.widths);
}

TEST(Config, ErrorsNameFieldAndLine) {
  try {
    parse_config("wavefunction:\n  s: 1\n  x0: abc\n", "c.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "wavefunction.x0");
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("c.yaml:3"), std::string::npos);
  }
  EXPECT_THROW(parse_config("grid: {n: 1}\n"), ConfigError);
  EXPECT_THROW(parse_config("grid: {x_min: 2, x_max: 1}\n"), ConfigError);
  EXPECT_THROW(parse_config("channel: {sigma: 0}\n"), ConfigError);
  EXPECT_THROW(parse_config("channel: {convention: other}\n"), ConfigError);
  EXPECT_THROW(parse_config("sweep: {s: [1, -2], sigma: [1]}\n"), ConfigError);
  EXPECT_THROW(parse_config("output: {format: xml}\n"), ConfigError);
  EXPECT_THROW(parse_config("colour: red\n"), ConfigError);
  EXPECT_THROW(parse_config("grid: [1, 2\n"), ConfigError);
}

TEST(Config, ValidateRequiresFieldsPerMode) {
  const auto cfg = parse_config("wavefunction: {s: 1}\nchannel: {}\n");
  try {
    validate(cfg, Mode::Simulate);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "channel.sigma");
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(validate(parse_config("sweep: {s: [1]}\n"), Mode::Sweep), ConfigError);
  EXPECT_THROW(validate(parse_config("wavefunction: {s: 1}\nchannel: {sigma: inf}\n"), Mode::Classify), ConfigError);
  EXPECT_NO_THROW(validate(parse_config("sweep: {s: [1], sigma: [2]}\n"), Mode::Sweep));
}

// ---------------------------------------------------------------------------
// simulate

TEST_F(Scratch, SimulateUnitWidthsGiveHalfProducts) {
  const auto cfg = file("c.yaml", "grid: {x_min: -12, x_max: 12, n: 512}\nwavefunction: {s: 1}\nchannel: {sigma: 1}\n");
  const auto r = run({"simulate", "--config", cfg, "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "s,sigma,trace,purity,entropy,w_x_diag,w_x_anti,w_p_diag,w_p_anti,prod1,prod2,regime");
  const auto cells = split(rows[1]);
  EXPECT_NEAR(std::stod(cells[9]), 0.5, 0.01);
  EXPECT_NEAR(std::stod(cells[10]), 0.5, 0.01);
}

TEST_F(Scratch, MissingSigmaIsConfigError) {
  const auto cfg = file("c.yaml", "wavefunction: {s: 1}\n");
  const auto r = run({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("channel.sigma"), std::string::npos) << r.err;
}

TEST_F(Scratch, SubResolutionSigmaWarnsAndCompletes) {
  const auto cfg = file("c.yaml", "wavefunction: {s: 1}\nchannel: {sigma: 0.001}\n");
  const auto r = run({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning: sigma"), std::string::npos);
  EXPECT_NE(r.out.find("purity:"), std::string::npos);
}

TEST_F(Scratch, OffCentrePacketWarns) {
  const auto cfg = file("c.yaml", "wavefunction: {s: 1, x0: 1}\nchannel: {sigma: 1}\n");
  const auto r = run({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("off-centre"), std::string::npos);
}

TEST_F(Scratch, BinaryDumpRoundTrips) {
  const auto cfg = file("c.yaml", "grid: {x_min: -6, x_max: 6, n: 64}\nwavefunction: {s: 1}\nchannel: {sigma: 2}\n");
  const auto prefix = file("rho");
  const auto r = run({"simulate", "--config", cfg, "--format", "bin", "--output", prefix});
  ASSERT_EQ(r.code, 0) << r.err;

  const Grid g(-6, 6, 64);
  const auto expect = apply_smeared_channel(pure_density(gaussian_packet(g, 1.0)), SmearKernel(2.0));
  ComplexMatrix<double> m;
  std::ifstream in(prefix + "_x.bin", std::ios::binary);
  const auto h = io::read_matrix(in, m);
  EXPECT_EQ(h.n, 64u);
  EXPECT_EQ(h.basis, 0u);
  EXPECT_EQ((m - expect.mat()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(fs::file_size(prefix + "_x.bin"), 32u + 64u * 64u * 16u);

  std::ifstream inp(prefix + "_p.bin", std::ios::binary);
  EXPECT_EQ(io::read_matrix(inp, m).basis, 1u);
}

TEST_F(Scratch, BinWithoutOutputIsConfigError) {
  const auto cfg = file("c.yaml", "wavefunction: {s: 1}\nchannel: {sigma: 1}\n");
  EXPECT_EQ(run({"simulate", "--config", cfg, "--format", "bin"}).code, 2);
}

// ---------------------------------------------------------------------------
// sweep

TEST_F(Scratch, SweepIsByteIdenticalAcrossRunsAndThreadCounts) {
  const auto cfg = file("c.yaml", "sweep: {s: [0.5, 1, 2], sigma: [0.5, 2], n: 128}\n");
  const auto a = file("a.csv");
  const auto b = file("b.csv");
  ASSERT_EQ(run({"sweep", "--config", cfg, "--output", a, "--threads", "3"}).code, 0);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--output", b, "--threads", "1"}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  ASSERT_EQ(run({"sweep", "--config", cfg, "--output", b, "--threads", "2"}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));

  const auto rows = data_rows(slurp(a));
  ASSERT_EQ(rows.size(), 7u);
  // s-major order.
  EXPECT_EQ(split(rows[1])[0], "0.5");
  EXPECT_EQ(split(rows[1])[1], "0.5");
  EXPECT_EQ(split(rows[2])[1], "2");
  EXPECT_EQ(split(rows[6])[0], "2");
}

TEST_F(Scratch, OneByOneSweepMatchesSimulate) {
  // The sweep grid for s = 1, sigma = 2 is +-20 with sweep.n points.
  const auto sw = file("sw.yaml", "sweep: {s: [1], sigma: [2], n: 256}\n");
  const auto sim = file("sim.yaml", "grid: {x_min: -20, x_max: 20, n: 256}\nwavefunction: {s: 1}\nchannel: {sigma: 2}\n");
  const auto a = run({"sweep", "--config", sw});
  const auto b = run({"simulate", "--config", sim, "--format", "csv"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(data_rows(a.out), data_rows(b.out));
}

TEST_F(Scratch, ExtremeCornersGiveFourRowLabels) {
  const auto cfg = file("c.yaml", "sweep: {s: [0.01, 100], sigma: [0.01, 100], n: 64}\n");
  const auto r = run({"sweep", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 5u);
  std::vector<std::string> labels;
  for (std::size_t i = 1; i < rows.size(); ++i) labels.push_back(split(rows[i]).back());
  EXPECT_EQ(labels, (std::vector<std::string>{"row2", "row3", "row1", "row4"}));
}

TEST_F(Scratch, SweepWithoutSectionIsConfigError) {
  const auto cfg = file("c.yaml", "wavefunction: {s: 1}\n");
  const auto r = run({"sweep", "--config", cfg});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweep"), std::string::npos);
}

// ---------------------------------------------------------------------------
// validate, classify, classical

TEST(Validate, AllChecksPass) {
  const auto checks = run_validation();
  for (const auto& c : checks) EXPECT_TRUE(c.pass()) << c.name << " " << c.deviation;
  const auto find = [&](const std::string& name) {
    return std::find_if(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
  };
  ASSERT_NE(find("closed_form_x"), checks.end());
  EXPECT_LT(find("closed_form_x")->deviation, 1e-8);
  EXPECT_LT(find("closed_form_p")->deviation, 1e-6);
  EXPECT_LT(find("composition")->deviation, 1e-10);
}

TEST(Validate, ExitsZero) {
  const auto r = run({"validate"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST(Classify, FlagsSelectRows) {
  EXPECT_NE(run({"classify", "--s", "100", "--sigma", "0.01"}).out.find("regime: row1"), std::string::npos);
  EXPECT_NE(run({"classify", "--s", "0.01", "--sigma", "0.01"}).out.find("regime: row2"), std::string::npos);
  EXPECT_NE(run({"classify", "--s", "0.01", "--sigma", "100"}).out.find("regime: row3"), std::string::npos);
  EXPECT_NE(run({"classify", "--s", "100", "--sigma", "100"}).out.find("regime: row4"), std::string::npos);
  EXPECT_EQ(run({"classify", "--s", "1"}).code, 2);
  EXPECT_EQ(run({"classify", "--s", "1", "--sigma", "1", "--factor", "0.5"}).code, 2);
}

TEST(Classical, DefaultsReportBinScale) {
  const auto r = run({"classical"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("momentum_bin_scale: 3.80231276e-28"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("protons"), std::string::npos);
  const auto c = run_classical({1e-6, 3, 1e-6});
  EXPECT_NEAR(c.cell_mass, 0.8663855974622838, 1e-4);
  EXPECT_EQ(run({"classical", "--ratio", "-1"}).code, 2);
}

// ---------------------------------------------------------------------------
// povm-demo

TEST(PovmDemo, DeterministicForSeed) {
  const auto a = run({"povm-demo", "--seed", "42", "--dim-s", "3", "--dim-a", "2"});
  const auto b = run({"povm-demo", "--seed", "42", "--dim-s", "3", "--dim-a", "2"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"povm-demo", "--seed", "43", "--dim-s", "3", "--dim-a", "2"}).out);
}

TEST(PovmDemo, IdentityIsProjective) {
  const auto r = run({"povm-demo", "--unitary", "identity", "--dim-s", "3", "--dim-a", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("projective: true"), std::string::npos);
}

TEST(PovmDemo, HundredSeedsPass) {
  const auto r = run({"povm-demo", "--seed", "1000", "--trials", "100", "--dim-s", "4", "--dim-a", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("summary: 100/100 trials passed"), std::string::npos);
}

TEST(PovmDemo, DimensionOutOfRange) {
  EXPECT_EQ(run({"povm-demo", "--dim-a", "5"}).code, 2);
  EXPECT_EQ(run({"povm-demo", "--dim-s", "1"}).code, 2);
}

// ---------------------------------------------------------------------------
// Executable

TEST(Executable, ExitCodes) {
  const std::string tool = VNSMEAR_TOOL_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("validate"), 0);
  EXPECT_EQ(status("simulate"), 2);
  EXPECT_EQ(status("--no-such-flag"), 2);
  EXPECT_EQ(status("--help"), 0);
}
