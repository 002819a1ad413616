#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oqft/cli.hpp"
#include "oqft/exceptions.hpp"
#include "oqft/kerr.hpp"

using namespace oqft;
using namespace oqft::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("oqft_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "oqft");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

int config_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  ScenarioConfig c;
  validate(c);
  EXPECT_EQ(c.initial.size(), 2u);
  EXPECT_EQ(parse_config(echo_config(c)), c);
}

TEST(Config, EditedConfigRoundTrips) {
  const std::string text = R"(seed: 17
device:
  g_mhz: [190, 200, 210]
  qubit_mhz: [6000, 6010, 6020]
  tau_ad_us: 0.12
protocol:
  n: 3
  omega_khz: [5000, 5000, 200]
  dressing: ramp
  mode: physical
  integrator: expmid
  initial:
    "010": [0.5, 0.25]
    "101": [0, -1]
kerr:
  chi_khz: -40
  winding: 0
phase:
  theta_over_2pi: [0.1, 0.3333333333333333]
output:
  dir: somewhere
)";
  const auto c = parse_config(text);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.g_mhz.size(), 3u);
  EXPECT_EQ(c.initial.at("010"), std::complex<double>(0.5, 0.25));
  EXPECT_EQ(c.out_dir, "somewhere");
  EXPECT_EQ(parse_config(echo_config(c)), c);
}

TEST(Config, ErrorsCarryTheSourceLine) {
  EXPECT_EQ(config_error_line("seed: 1\ndevice:\n  bogus: 3\n"), 3);
  EXPECT_EQ(config_error_line("device:\n  g_mhz: [-200]\n"), 2);
  EXPECT_EQ(config_error_line("protocol:\n  n: 3\n  mode: sideways\n"), 3);
  EXPECT_EQ(config_error_line("protocol:\n  n: three\n"), 2);
  EXPECT_EQ(config_error_line("protocol:\n  n: 2\n  omega_khz: [200, 200, 200]\n"), 3);
  EXPECT_EQ(config_error_line("protocol:\n  n: 2\n  initial:\n    \"0x1\": [1, 0]\n"), 4);
  EXPECT_GT(config_error_line("device: [unclosed\n"), 0);
}

TEST(Config, NegativeCouplingMessageNamesTheField) {
  try {
    parse_config("device:\n  g_mhz: [-200]\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("g_mhz"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).rfind("line 2:", 0), 0u);
  }
}

TEST(Config, LabUnitsBecomeAngular) {
  ScenarioConfig c;
  validate(c);
  const auto p = device_params(c);
  EXPECT_NEAR(p.coupling(0), 2 * M_PI * 200.0, 1e-9);
  EXPECT_NEAR(p.qubit_frequency(2), 2 * M_PI * 6000.0, 1e-9);
  const auto plan = make_plan(c);
  EXPECT_NEAR(plan.steps[0].omega, 2 * M_PI * 0.2, 1e-12);
  const auto amps = initial_amplitudes(c);
  EXPECT_NEAR(std::abs(amps(0)), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(amps(7)), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Commands, QftMatchesOracleWithProbabilityOneEighth) {
  ScenarioConfig c;
  validate(c);
  RunDirectory out(scratch("qft"));
  const auto s = cmd_qft(c, out);
  EXPECT_NEAR(s["success_probability"].get<double>(), 0.125, 1e-12);
  EXPECT_NEAR(s["fidelity_vs_oracle"].get<double>(), 1.0, 1e-12);
  // Amplitude table against the oracle column.
  std::ifstream f(out.root() / "qft_amplitudes.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "n,oracle_re,oracle_im,b_re,b_im,b_probability");
  int rows = 0;
  while (std::getline(f, line)) {
    double v[6];
    char comma;
    std::istringstream is(line);
    is >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4] >> comma >> v[5];
    EXPECT_NEAR(v[1], v[3], 1e-6);
    EXPECT_NEAR(v[2], v[4], 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST(Commands, ResourcesTable) {
  ScenarioConfig c;
  validate(c);
  RunDirectory out(scratch("resources"));
  const auto s = cmd_resources(c, out);
  EXPECT_EQ(s[2]["n"], 3);
  EXPECT_EQ(s[2]["conventional"], 15);
  EXPECT_EQ(s[2]["recycling"], 16);
  EXPECT_EQ(s[2]["oscillator"], 16);
}

TEST(Commands, WignerIntegratesToOne) {
  ScenarioConfig c;
  validate(c);
  RunDirectory out(scratch("wigner"));
  const auto s = cmd_wigner(c, out);
  EXPECT_NEAR(s["grid_integral"].get<double>(), 1.0, 1e-2);
  EXPECT_EQ(first_line(out.root() / "wigner.csv"), "x,p,wigner");
}

TEST(Commands, SingleQubitPhysicalTransfer) {
  auto c = parse_config("protocol:\n  n: 1\n  mode: physical\n  samples: 10\n");
  RunDirectory out(scratch("transfer1"));
  const auto s = cmd_transfer(c, out);
  EXPECT_GE(s["step_fidelities"][0]["fidelity"].get<double>(), 0.999);
  EXPECT_GE(s["final_fidelity"].get<double>(), 0.999);
  EXPECT_EQ(first_line(out.root() / "series.csv"), "k,t_us,basis_label,population");
  EXPECT_TRUE(fs::exists(out.root() / "steps.csv"));
}

TEST(Commands, CsvHeaders) {
  ScenarioConfig c;
  validate(c);
  RunDirectory out(scratch("headers"));
  cmd_errors(c, out);
  cmd_phase(c, out);
  EXPECT_EQ(first_line(out.root() / "errors_jitter.csv"),
            "dt_over_t0,infidelity_exact,infidelity_quadratic,uniform_infidelity_exact,uniform_infidelity_approx");
  EXPECT_EQ(first_line(out.root() / "errors_energy.csv"), "t0_dE,chain_fidelity,fidelity_exact,fidelity_approx");
  EXPECT_EQ(first_line(out.root() / "phase_0.csv"), "n_hat,theta_hat_rad,probability,closed_form_probability,counts");
}

TEST(RunMain, SameSeedGivesByteIdenticalOutputs) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const char* cmd : {"phase", "qft", "errors", "resources"}) {
    ASSERT_EQ(run({cmd, "--seed", "5", "--out", (a / cmd).string()}), 0);
    ASSERT_EQ(run({cmd, "--seed", "5", "--out", (b / cmd).string()}), 0);
    for (const auto& e : fs::directory_iterator(a / cmd)) {
      const auto name = e.path().filename().string();
      if (name == "timing.log" || name == "config.yaml" || name == "manifest.json") continue;
      EXPECT_EQ(slurp(e.path()), slurp(b / cmd / name)) << cmd << "/" << name;
    }
    auto echo_a = parse_config(slurp(a / cmd / "config.yaml"));
    auto echo_b = parse_config(slurp(b / cmd / "config.yaml"));
    echo_a.out_dir = echo_b.out_dir = "";
    EXPECT_EQ(echo_a, echo_b);
    EXPECT_EQ(echo_a.seed, 5u);
  }
}

TEST(RunMain, ManifestHasNoClockTime) {
  const auto a = scratch("manifest_a"), b = scratch("manifest_b");
  ASSERT_EQ(run({"resources", "--out", a.string()}), 0);
  ASSERT_EQ(run({"resources", "--out", b.string()}), 0);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
}

TEST(RunMain, ExitCodes) {
  const auto dir = scratch("codes");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.yaml") << "device:\n  g_mhz: [-1]\n";
    std::ofstream(dir / "crowded.yaml") << "protocol:\n  n: 6\n  omega_khz: [5000]\n";
  }
  EXPECT_EQ(run({"transfer", "--config", (dir / "bad.yaml").string(), "--out", (dir / "o1").string()}), 2);
  EXPECT_EQ(run({"transfer", "--mode", "sideways"}), 2);
  EXPECT_EQ(run({"transfer", "--config", (dir / "missing.yaml").string()}), 2);
  EXPECT_EQ(run({"transfer", "--config", (dir / "crowded.yaml").string(), "--out", (dir / "o2").string()}), 4);
  EXPECT_EQ(run({"qft", "--step-scale", "3", "--out", (dir / "o3").string()}), 2);
}
