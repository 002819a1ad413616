#pragma once

// Scenario configuration and the command runners behind the oqft tool.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqft/device.hpp"
#include "oqft/transfer.hpp"

namespace oqft::cli {

/// Every field in lab units as written in the file. Frequencies in MHz or
/// kHz as the name says, times in us.
struct ScenarioConfig {
  std::uint64_t seed = 0;

  // device
  double omega_a_mhz = 5000.0;
  double omega_b_mhz = 7000.0;
  double detuning_start_mhz = 1000.0;
  std::vector<double> qubit_mhz;  // empty: omega_a + detuning_start for every qubit
  std::vector<double> g_mhz{200.0};
  double alpha_mhz = -200.0;
  double tau_ad_us = 0.1;

  // protocol
  std::size_t n = 3;
  std::vector<double> omega_khz{200.0};  // one per step (k = n-1 .. 0) or one shared
  std::string dressing = "ideal";        // ideal | ramp
  std::string mode = "ideal";            // ideal | physical
  std::size_t fock_pad = 4;
  double step_scale = 1.0;
  double step_us = 0.0;                  // 0: automatic
  std::string integrator = "rk4";        // rk4 | expmid
  std::string quadrature = "sigma_y";    // sigma_y | sigma_x
  std::size_t samples = 200;
  std::map<std::string, std::complex<double>> initial;  // bitstring -> amplitude, unnormalized

  // kerr
  double chi_khz = -50.0;          // forward transform
  double inverse_chi_khz = 50.0;   // phase estimation
  unsigned winding = 0;

  // phase
  std::vector<double> theta_over_2pi{0.625};
  std::size_t trials = 1000;

  // errors
  std::vector<double> jitter_ratios{0.005, 0.01, 0.02};
  std::size_t repetitions = 64;
  std::vector<double> energy_t0_de{0.001, 0.002, 0.005, 0.01, 0.02};

  // resources
  std::size_t n_min = 1;
  std::size_t n_max = 10;

  // wigner
  double wigner_extent = 4.0;
  std::size_t wigner_points = 81;
  std::size_t wigner_pad = 8;

  // output
  std::string out_dir;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Fills defaults that depend on n (initial state) and checks every field.
/// Throws ConfigError.
void validate(ScenarioConfig& config);

/// Parses YAML text; unknown keys and bad values raise ConfigError with the
/// source line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical YAML rendering; parse_config(echo_config(c)) == c.
std::string echo_config(const ScenarioConfig& config);

dynamics::DeviceParams device_params(const ScenarioConfig& config);
transfer::TransferPlan make_plan(const ScenarioConfig& config);
/// Initial register amplitudes, normalized, indexed by register value.
hilbert::Vector initial_amplitudes(const ScenarioConfig& config);

/// Output directory plus the list of files written so far.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content);
  void time(const std::string& label, double seconds);
  /// Writes manifest.json, config.yaml and timing.log.
  void finish(const std::string& command, const ScenarioConfig& config,
              const nlohmann::ordered_json& summary);

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::size_t>> files_;
  std::vector<std::pair<std::string, double>> timings_;
};

nlohmann::ordered_json cmd_transfer(const ScenarioConfig& config, RunDirectory& out);
nlohmann::ordered_json cmd_qft(const ScenarioConfig& config, RunDirectory& out);
nlohmann::ordered_json cmd_phase(const ScenarioConfig& config, RunDirectory& out);
nlohmann::ordered_json cmd_errors(const ScenarioConfig& config, RunDirectory& out);
nlohmann::ordered_json cmd_resources(const ScenarioConfig& config, RunDirectory& out);
nlohmann::ordered_json cmd_wigner(const ScenarioConfig& config, RunDirectory& out);

/// Entry point: 0 success, 2 config error, 3 numerical failure,
/// 4 precondition violation.
int run_main(int argc, char** argv);

}  // namespace oqft::cli
