#include "oqft/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "oqft/errors.hpp"
#include "oqft/exceptions.hpp"
#include "oqft/kerr.hpp"
#include "oqft/phase_est.hpp"
#include "oqft/units.hpp"

#ifndef OQFT_VERSION
#define OQFT_VERSION "0.0.0"
#endif

namespace oqft::cli {

namespace fs = std::filesystem;
using hilbert::CompositeSpace;
using hilbert::cplx;
using hilbert::FockRole;
using hilbert::FockSpace;
using hilbert::StateVector;
using hilbert::Vector;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- parsing

/// A validation failure tied to a dotted key such as "device.g_mhz".
struct KeyedError {
  std::string key;
  std::string message;
};

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw KeyedError{key, message};
}

using LineMap = std::map<std::string, int>;

int line_of(const YAML::Node& node) {
  const auto m = node.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

class Reader {
 public:
  explicit Reader(LineMap& lines) : lines_(lines) {}

  double real(const YAML::Node& n, const std::string& key) {
    note(n, key);
    if (!n.IsScalar()) throw ConfigError(key + ": expected a number", line_of(n));
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw YAML::BadConversion(n.Mark());
      return v;
    } catch (const YAML::BadConversion&) {
      throw ConfigError(key + ": '" + n.Scalar() + "' is not a number", line_of(n));
    }
  }

  std::uint64_t count(const YAML::Node& n, const std::string& key) {
    note(n, key);
    if (!n.IsScalar()) throw ConfigError(key + ": expected a non-negative integer", line_of(n));
    const std::string s = n.Scalar();
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw ConfigError(key + ": '" + s + "' is not a non-negative integer", line_of(n));
    return v;
  }

  std::string text(const YAML::Node& n, const std::string& key) {
    note(n, key);
    if (!n.IsScalar()) throw ConfigError(key + ": expected a string", line_of(n));
    return n.Scalar();
  }

  std::vector<double> reals(const YAML::Node& n, const std::string& key) {
    note(n, key);
    if (n.IsScalar()) return {real(n, key)};
    if (!n.IsSequence()) throw ConfigError(key + ": expected a number or a list", line_of(n));
    std::vector<double> out;
    for (const auto& e : n) out.push_back(real(e, key));
    note(n, key);
    return out;
  }

  cplx amplitude(const YAML::Node& n, const std::string& key) {
    if (n.IsScalar()) return real(n, key);
    if (n.IsSequence() && n.size() == 2) return {real(n[0], key), real(n[1], key)};
    throw ConfigError(key + ": expected a number or [re, im]", line_of(n));
  }

  /// Calls fn(key, value) for every entry of a mapping section.
  template <class Fn>
  void section(const YAML::Node& n, const std::string& name, Fn fn) {
    note(n, name);
    if (!n.IsMap()) throw ConfigError(name + ": expected a mapping", line_of(n));
    for (const auto& kv : n) {
      const std::string key = kv.first.Scalar();
      lines_[name.empty() ? key : name + "." + key] = line_of(kv.first);
      if (!fn(key, kv.second))
        throw ConfigError("unknown key '" + (name.empty() ? key : name + "." + key) + "'",
                          line_of(kv.first));
    }
  }

 private:
  void note(const YAML::Node& n, const std::string& key) {
    if (!lines_.count(key)) lines_[key] = line_of(n);
  }
  LineMap& lines_;
};

void check_choice(const std::string& key, const std::string& v,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
  fail(key, "'" + v + "' is not one of " + list);
}

void validate_keyed(ScenarioConfig& c) {
  auto positive = [](const std::string& key, double v) {
    if (!(v > 0.0)) fail(key, "must be positive");
  };
  positive("device.omega_a_mhz", c.omega_a_mhz);
  positive("device.omega_b_mhz", c.omega_b_mhz);
  positive("device.detuning_start_mhz", c.detuning_start_mhz);
  positive("device.tau_ad_us", c.tau_ad_us);
  if (c.alpha_mhz == 0.0) fail("device.alpha_mhz", "must be non-zero");

  if (c.n < 1 || c.n > 12) fail("protocol.n", "must lie in 1..12");
  if (c.g_mhz.size() != 1 && c.g_mhz.size() != c.n)
    fail("device.g_mhz", "needs one value or one per qubit");
  for (double g : c.g_mhz) positive("device.g_mhz", g);
  if (!c.qubit_mhz.empty() && c.qubit_mhz.size() != c.n)
    fail("device.qubit_mhz", "needs one value per qubit");
  for (double w : c.qubit_mhz) positive("device.qubit_mhz", w);

  if (c.omega_khz.size() != 1 && c.omega_khz.size() != c.n)
    fail("protocol.omega_khz", "needs one value or one per step");
  for (double w : c.omega_khz) positive("protocol.omega_khz", w);
  check_choice("protocol.dressing", c.dressing, {"ideal", "ramp"});
  check_choice("protocol.mode", c.mode, {"ideal", "physical"});
  check_choice("protocol.integrator", c.integrator, {"rk4", "expmid"});
  check_choice("protocol.quadrature", c.quadrature, {"sigma_y", "sigma_x"});
  if (c.fock_pad < 2) fail("protocol.fock_pad", "must be at least 2");
  if (!(c.step_scale > 0.0 && c.step_scale <= 1.0)) fail("protocol.step_scale", "must lie in (0, 1]");
  if (c.step_us < 0.0) fail("protocol.step_us", "must be >= 0");
  if (c.samples < 2) fail("protocol.samples", "must be at least 2");

  if (c.initial.empty()) {
    c.initial[std::string(c.n, '0')] = 1.0;
    c.initial[std::string(c.n, '1')] = 1.0;
  }
  double norm = 0.0;
  for (const auto& [bits, a] : c.initial) {
    if (bits.size() != c.n || bits.find_first_not_of("01") != std::string::npos)
      fail("protocol.initial." + bits, "'" + bits + "' is not an n-bit string");
    norm += std::norm(a);
  }
  if (!(norm > 0.0)) fail("protocol.initial", "all amplitudes are zero");

  if (c.chi_khz == 0.0) fail("kerr.chi_khz", "must be non-zero");
  if (c.inverse_chi_khz == 0.0) fail("kerr.inverse_chi_khz", "must be non-zero");

  if (c.theta_over_2pi.empty()) fail("phase.theta_over_2pi", "needs at least one value");
  for (double r : c.jitter_ratios)
    if (!(r > 0.0 && r <= 0.1)) fail("errors.jitter_ratios", "values must lie in (0, 0.1]");
  if (c.repetitions < 1) fail("errors.repetitions", "must be at least 1");
  for (double x : c.energy_t0_de)
    if (!(x >= 0.0 && x < 0.5)) fail("errors.energy_t0_de", "values must lie in [0, 0.5)");

  if (c.n_min < 1) fail("resources.n_min", "must be at least 1");
  if (c.n_max < c.n_min) fail("resources.n_max", "must be >= n_min");
  positive("wigner.extent", c.wigner_extent);
  if (c.wigner_points < 2) fail("wigner.points", "must be at least 2");
}

ScenarioConfig parse_node(const YAML::Node& root, LineMap& lines) {
  ScenarioConfig c;
  Reader r(lines);
  if (root.IsNull()) return c;
  r.section(root, "", [&](const std::string& key, const YAML::Node& v) {
    if (key == "seed") {
      c.seed = r.count(v, "seed");
    } else if (key == "device") {
      r.section(v, "device", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "device." + k;
        if (k == "omega_a_mhz") c.omega_a_mhz = r.real(x, p);
        else if (k == "omega_b_mhz") c.omega_b_mhz = r.real(x, p);
        else if (k == "detuning_start_mhz") c.detuning_start_mhz = r.real(x, p);
        else if (k == "qubit_mhz") c.qubit_mhz = r.reals(x, p);
        else if (k == "g_mhz") c.g_mhz = r.reals(x, p);
        else if (k == "alpha_mhz") c.alpha_mhz = r.real(x, p);
        else if (k == "tau_ad_us") c.tau_ad_us = r.real(x, p);
        else return false;
        return true;
      });
    } else if (key == "protocol") {
      r.section(v, "protocol", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "protocol." + k;
        if (k == "n") c.n = r.count(x, p);
        else if (k == "omega_khz") c.omega_khz = r.reals(x, p);
        else if (k == "dressing") c.dressing = r.text(x, p);
        else if (k == "mode") c.mode = r.text(x, p);
        else if (k == "fock_pad") c.fock_pad = r.count(x, p);
        else if (k == "step_scale") c.step_scale = r.real(x, p);
        else if (k == "step_us") c.step_us = r.real(x, p);
        else if (k == "integrator") c.integrator = r.text(x, p);
        else if (k == "quadrature") c.quadrature = r.text(x, p);
        else if (k == "samples") c.samples = r.count(x, p);
        else if (k == "initial") {
          c.initial.clear();
          r.section(x, p, [&](const std::string& bits, const YAML::Node& a) {
            c.initial[bits] = r.amplitude(a, p);
            return true;
          });
        } else return false;
        return true;
      });
    } else if (key == "kerr") {
      r.section(v, "kerr", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "kerr." + k;
        if (k == "chi_khz") c.chi_khz = r.real(x, p);
        else if (k == "inverse_chi_khz") c.inverse_chi_khz = r.real(x, p);
        else if (k == "winding") c.winding = static_cast<unsigned>(r.count(x, p));
        else return false;
        return true;
      });
    } else if (key == "phase") {
      r.section(v, "phase", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "phase." + k;
        if (k == "theta_over_2pi") c.theta_over_2pi = r.reals(x, p);
        else if (k == "trials") c.trials = r.count(x, p);
        else return false;
        return true;
      });
    } else if (key == "errors") {
      r.section(v, "errors", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "errors." + k;
        if (k == "jitter_ratios") c.jitter_ratios = r.reals(x, p);
        else if (k == "repetitions") c.repetitions = r.count(x, p);
        else if (k == "energy_t0_de") c.energy_t0_de = r.reals(x, p);
        else return false;
        return true;
      });
    } else if (key == "resources") {
      r.section(v, "resources", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "resources." + k;
        if (k == "n_min") c.n_min = r.count(x, p);
        else if (k == "n_max") c.n_max = r.count(x, p);
        else return false;
        return true;
      });
    } else if (key == "wigner") {
      r.section(v, "wigner", [&](const std::string& k, const YAML::Node& x) {
        const std::string p = "wigner." + k;
        if (k == "extent") c.wigner_extent = r.real(x, p);
        else if (k == "points") c.wigner_points = r.count(x, p);
        else if (k == "pad") c.wigner_pad = r.count(x, p);
        else return false;
        return true;
      });
    } else if (key == "output") {
      r.section(v, "output", [&](const std::string& k, const YAML::Node& x) {
        if (k != "dir") return false;
        c.out_dir = r.text(x, "output.dir");
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  return c;
}

// ---------------------------------------------------------------- helpers

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << v;
  return os.str();
}

transfer::Backend backend_of(const ScenarioConfig& c) {
  return c.mode == "physical" ? transfer::Backend::Dynamical : transfer::Backend::Ideal;
}

CompositeSpace transfer_space(std::size_t fock_dim, std::size_t n) {
  return CompositeSpace({FockSpace{fock_dim, FockRole::ResonatorA}, hilbert::QubitRegister{n}});
}

/// Register amplitudes placed on |0>_A.
StateVector register_state(const Vector& amps, std::size_t fock_dim, std::size_t n) {
  CompositeSpace space = transfer_space(fock_dim, n);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  v.head(amps.size()) = amps;
  return StateVector(std::move(space), std::move(v));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StateVector a_only(const Vector& amps) {
  return StateVector(CompositeSpace({FockSpace{static_cast<std::size_t>(amps.size()),
                                               FockRole::ResonatorA}}),
                     amps);
}

struct QftOutcome {
  StateVector b_state;
  hilbert::DensityMatrix rho_b;
  double probability = 0.0;
  double tau2 = 0.0;
  json details;
};

/// Transfer, forward Kerr transform and disentangling in the configured mode.
QftOutcome qft_pipeline(const ScenarioConfig& c, RunDirectory* out) {
  const std::size_t q = std::size_t{1} << c.n;
  const Vector amps = initial_amplitudes(c);
  kerr::KerrConfig kc{units::from_khz(c.chi_khz), c.winding, kerr::Direction::Forward};
  const double tau2 = kerr::qft_duration(q, kc);

  if (c.mode == "ideal") {
    auto r = kerr::run_qft(a_only(amps), kc);
    const Vector& b = r.b_state.amplitudes();
    hilbert::DensityMatrix rho(r.b_state.space(), b * b.adjoint());
    json d;
    d["disentangle"] = "ideal";
    return {r.b_state, std::move(rho), r.probability, tau2, std::move(d)};
  }

  const auto plan = make_plan(c);
  transfer::TransferEngine engine(plan, transfer::Backend::Dynamical);
  auto t0 = std::chrono::steady_clock::now();
  auto moved = transfer::execute_transfer(register_state(amps, plan.fock_dim, c.n), engine);
  if (out) out->time("transfer", seconds_since(t0));

  t0 = std::chrono::steady_clock::now();
  StateVector joint = hilbert::tensor(moved.state, kerr::prepare_uniform_B(q));
  joint = kerr::kerr_evolve(joint, kc.chi, tau2);
  auto dis = kerr::physical_disentangle(joint, engine);
  if (out) out->time("kerr_and_disentangle", seconds_since(t0));

  json d;
  d["disentangle"] = "physical";
  d["qubit_projection_probability"] = dis.probability;
  d["a_vacuum_probability"] = dis.a_vacuum;
  auto& steps = d["transfer_steps"] = json::array();
  for (const auto& rep : moved.reports) steps.push_back(transfer::to_json(rep));
  const double p = dis.probability * dis.a_vacuum;
  return {std::move(dis.b_state), std::move(dis.rho_b), p, tau2, std::move(d)};
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- config

void validate(ScenarioConfig& config) {
  try {
    validate_keyed(config);
  } catch (const KeyedError& e) {
    throw ConfigError(e.key + ": " + e.message);
  }
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("malformed YAML: " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  LineMap lines;
  ScenarioConfig c = parse_node(root, lines);
  try {
    validate_keyed(c);
  } catch (const KeyedError& e) {
    const auto it = lines.find(e.key);
    throw ConfigError(e.key + ": " + e.message, it == lines.end() ? 0 : it->second);
  }
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const ScenarioConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto list = [&](const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << x;
    e << YAML::EndSeq;
  };
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;

  e << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "omega_a_mhz" << YAML::Value << c.omega_a_mhz;
  e << YAML::Key << "omega_b_mhz" << YAML::Value << c.omega_b_mhz;
  e << YAML::Key << "detuning_start_mhz" << YAML::Value << c.detuning_start_mhz;
  e << YAML::Key << "qubit_mhz" << YAML::Value;
  list(c.qubit_mhz);
  e << YAML::Key << "g_mhz" << YAML::Value;
  list(c.g_mhz);
  e << YAML::Key << "alpha_mhz" << YAML::Value << c.alpha_mhz;
  e << YAML::Key << "tau_ad_us" << YAML::Value << c.tau_ad_us;
  e << YAML::EndMap;

  e << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n" << YAML::Value << c.n;
  e << YAML::Key << "omega_khz" << YAML::Value;
  list(c.omega_khz);
  e << YAML::Key << "dressing" << YAML::Value << c.dressing;
  e << YAML::Key << "mode" << YAML::Value << c.mode;
  e << YAML::Key << "fock_pad" << YAML::Value << c.fock_pad;
  e << YAML::Key << "step_scale" << YAML::Value << c.step_scale;
  e << YAML::Key << "step_us" << YAML::Value << c.step_us;
  e << YAML::Key << "integrator" << YAML::Value << c.integrator;
  e << YAML::Key << "quadrature" << YAML::Value << c.quadrature;
  e << YAML::Key << "samples" << YAML::Value << c.samples;
  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  for (const auto& [bits, a] : c.initial) {
    e << YAML::Key << YAML::DoubleQuoted << bits << YAML::Value;
    e << YAML::Flow << YAML::BeginSeq << a.real() << a.imag() << YAML::EndSeq;
  }
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "kerr" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "chi_khz" << YAML::Value << c.chi_khz;
  e << YAML::Key << "inverse_chi_khz" << YAML::Value << c.inverse_chi_khz;
  e << YAML::Key << "winding" << YAML::Value << c.winding;
  e << YAML::EndMap;

  e << YAML::Key << "phase" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "theta_over_2pi" << YAML::Value;
  list(c.theta_over_2pi);
  e << YAML::Key << "trials" << YAML::Value << c.trials;
  e << YAML::EndMap;

  e << YAML::Key << "errors" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "jitter_ratios" << YAML::Value;
  list(c.jitter_ratios);
  e << YAML::Key << "repetitions" << YAML::Value << c.repetitions;
  e << YAML::Key << "energy_t0_de" << YAML::Value;
  list(c.energy_t0_de);
  e << YAML::EndMap;

  e << YAML::Key << "resources" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_min" << YAML::Value << c.n_min;
  e << YAML::Key << "n_max" << YAML::Value << c.n_max;
  e << YAML::EndMap;

  e << YAML::Key << "wigner" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "extent" << YAML::Value << c.wigner_extent;
  e << YAML::Key << "points" << YAML::Value << c.wigner_points;
  e << YAML::Key << "pad" << YAML::Value << c.wigner_pad;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << c.out_dir;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

dynamics::DeviceParams device_params(const ScenarioConfig& c) {
  dynamics::DeviceParams p;
  p.omega_A = units::from_mhz(c.omega_a_mhz);
  p.omega_B = units::from_mhz(c.omega_b_mhz);
  p.detuning_start = units::from_mhz(c.detuning_start_mhz);
  if (c.qubit_mhz.empty()) {
    p.omega_q.assign(c.n, p.omega_A + p.detuning_start);
  } else {
    for (double w : c.qubit_mhz) p.omega_q.push_back(units::from_mhz(w));
  }
  for (double g : c.g_mhz) p.g.push_back(units::from_mhz(g));
  p.chi_AB = units::from_khz(c.chi_khz);
  p.alpha = units::from_mhz(c.alpha_mhz);
  p.tau_ad = c.tau_ad_us;
  return p;
}

transfer::TransferPlan make_plan(const ScenarioConfig& c) {
  transfer::PlanOptions o;
  o.fock_pad = c.fock_pad;
  o.dressing = c.dressing == "ramp" ? dynamics::DressingMode::Ramp : dynamics::DressingMode::Ideal;
  o.quadrature = c.quadrature == "sigma_x" ? dynamics::Quadrature::SigmaX : dynamics::Quadrature::SigmaY;
  o.propagation.step = c.step_us;
  o.propagation.step_scale = c.step_scale;
  o.propagation.integrator =
      c.integrator == "expmid" ? dynamics::Integrator::ExpMidpoint : dynamics::Integrator::Rk4;
  o.samples = c.samples;
  std::vector<double> omegas;
  for (double w : c.omega_khz) omegas.push_back(units::from_khz(w));
  return transfer::build_plan(c.n, omegas, device_params(c), o);
}

Vector initial_amplitudes(const ScenarioConfig& c) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << c.n));
  for (const auto& [bits, a] : c.initial)
    v(static_cast<Eigen::Index>(hilbert::register_value(bits))) = a;
  return v / v.norm();
}

// ---------------------------------------------------------------- run dir

RunDirectory::RunDirectory(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

void RunDirectory::write(const std::string& name, const std::string& content) {
  std::ofstream f(root_ / name, std::ios::binary);
  f << content;
  if (!f) throw Error("cannot write " + (root_ / name).string());
  files_.emplace_back(name, content.size());
}

void RunDirectory::time(const std::string& label, double seconds) {
  timings_.emplace_back(label, seconds);
}

void RunDirectory::finish(const std::string& command, const ScenarioConfig& config,
                          const json& summary) {
  write("config.yaml", echo_config(config));
  json m;
  m["tool"] = "oqft";
  m["version"] = OQFT_VERSION;
  m["command"] = command;
  m["seed"] = config.seed;
  m["config"] = "config.yaml";
  m["summary"] = summary;
  auto& files = m["files"] = json::array();
  for (const auto& [name, bytes] : files_) files.push_back({{"name", name}, {"bytes", bytes}});
  std::ofstream(root_ / "manifest.json") << m.dump(2) << '\n';

  std::ofstream log(root_ / "timing.log");
  log << "finished " << iso_now() << '\n';
  for (const auto& [label, s] : timings_) log << label << ' ' << std::fixed << std::setprecision(3) << s << " s\n";
}

// ---------------------------------------------------------------- commands

json cmd_transfer(const ScenarioConfig& c, RunDirectory& out) {
  const auto plan = make_plan(c);
  transfer::TransferEngine engine(plan, backend_of(c));
  const StateVector initial = register_state(initial_amplitudes(c), plan.fock_dim, c.n);

  const auto t0 = std::chrono::steady_clock::now();
  auto result = transfer::execute_transfer(initial, engine);
  out.time("transfer", seconds_since(t0));
  for (const auto& r : result.reports)
    if (r.propagation) out.time("step k=" + std::to_string(r.k), r.propagation->wall_seconds);

  const double final_fid = hilbert::overlap_fidelity(transfer::ideal_transfer(initial, c.n), result.state);

  out.write("steps.csv", transfer::step_table_csv(result.reports));
  if (engine.backend() == transfer::Backend::Dynamical)
    out.write("series.csv", transfer::series_csv(result.reports));
  json j;
  j["plan"] = transfer::to_json(plan);
  j["backend"] = c.mode == "physical" ? "dynamical" : "ideal";
  auto& steps = j["steps"] = json::array();
  for (const auto& r : result.reports) steps.push_back(transfer::to_json(r));
  j["final_fidelity"] = final_fid;
  out.write("transfer.json", j.dump(2) + "\n");

  json s;
  s["backend"] = j["backend"];
  auto& fids = s["step_fidelities"] = json::array();
  for (const auto& r : result.reports) fids.push_back({{"k", r.k}, {"fidelity", r.fidelity}});
  s["final_fidelity"] = final_fid;
  return s;
}

json cmd_qft(const ScenarioConfig& c, RunDirectory& out) {
  const Vector oracle = kerr::dft_oracle(initial_amplitudes(c), kerr::Direction::Forward);
  auto r = qft_pipeline(c, &out);
  const Vector& b = r.b_state.amplitudes();
  const double fid = std::norm(oracle.dot(b));

  std::ostringstream csv;
  csv << "n,oracle_re,oracle_im,b_re,b_im,b_probability\n";
  for (Eigen::Index n = 0; n < oracle.size(); ++n)
    csv << n << ',' << fmt(oracle(n).real()) << ',' << fmt(oracle(n).imag()) << ','
        << fmt(b(n).real()) << ',' << fmt(b(n).imag()) << ',' << fmt(std::norm(b(n))) << '\n';
  out.write("qft_amplitudes.csv", csv.str());

  json j;
  j["mode"] = c.mode;
  j["q"] = oracle.size();
  j["tau2_us"] = r.tau2;
  j["success_probability"] = r.probability;
  j["fidelity_vs_oracle"] = fid;
  j["details"] = r.details;
  out.write("qft.json", j.dump(2) + "\n");

  return {{"mode", c.mode}, {"tau2_us", r.tau2}, {"success_probability", r.probability},
          {"fidelity_vs_oracle", fid}};
}

json cmd_phase(const ScenarioConfig& c, RunDirectory& out) {
  const std::size_t q = std::size_t{1} << c.n;
  std::optional<transfer::TransferEngine> engine;
  if (c.mode == "physical") {
    engine.emplace(make_plan(c), transfer::Backend::Dynamical);
    // Fill the lazy cache before the scenarios share the engine.
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < engine->plan().steps.size(); ++i) (void)engine->forward(i);
    out.time("transfer maps", seconds_since(t0));
  }
  const kerr::KerrConfig kc{units::from_khz(c.inverse_chi_khz), c.winding, kerr::Direction::Inverse};

  std::vector<std::future<phase_est::EstimateResult>> jobs;
  for (std::size_t i = 0; i < c.theta_over_2pi.size(); ++i) {
    phase_est::PhaseScenario sc;
    sc.theta = units::kTwoPi * c.theta_over_2pi[i];
    sc.n = c.n;
    sc.mode = engine ? phase_est::Mode::Physical : phase_est::Mode::Ideal;
    sc.trials = c.trials;
    sc.seed = c.seed + i;
    const transfer::TransferEngine* e = engine ? &*engine : nullptr;
    jobs.push_back(std::async(std::launch::async, [sc, kc, e] {
      return phase_est::run_phase_estimation(sc, kc, e);
    }));
  }

  json all = json::array();
  json summary = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto r = jobs[i].get();
    std::ostringstream csv;
    csv << "n_hat,theta_hat_rad,probability,closed_form_probability";
    if (!r.counts.empty()) csv << ",counts";
    csv << '\n';
    for (std::size_t n = 0; n < q; ++n) {
      csv << n << ',' << fmt(units::kTwoPi * static_cast<double>(n) / static_cast<double>(q)) << ','
          << fmt(r.distribution[n]) << ',' << fmt(phase_est::outcome_probability(r.theta, q, n));
      if (!r.counts.empty()) csv << ',' << r.counts[n];
      csv << '\n';
    }
    out.write("phase_" + std::to_string(i) + ".csv", csv.str());
    json j = phase_est::to_json(r);
    j["theta_over_2pi"] = c.theta_over_2pi[i];
    j["seed"] = c.seed + i;
    all.push_back(j);
    summary.push_back({{"theta_over_2pi", c.theta_over_2pi[i]},
                       {"modal_outcome", r.modal},
                       {"modal_probability", r.distribution[r.modal]},
                       {"circular_error_rad", r.error}});
  }
  out.write("phase.json", json{{"mode", c.mode}, {"q", q}, {"scenarios", all}}.dump(2) + "\n");
  return summary;
}

json cmd_errors(const ScenarioConfig& c, RunDirectory& out) {
  const Vector amps = initial_amplitudes(c);
  const auto paths = errors::decompose_paths(amps, c.n);
  const auto uniform = errors::uniform_paths(c.n);

  std::ostringstream jit;
  jit << "dt_over_t0,infidelity_exact,infidelity_quadratic,uniform_infidelity_exact,"
         "uniform_infidelity_approx\n";
  for (double r : c.jitter_ratios) {
    double quad = 0.0;
    for (const auto& e : paths.entries) {
      double prod = 1.0;
      for (std::size_t nodes : e.chains) prod *= errors::chain_fidelity_jitter(nodes, r, 1.0);
      quad += e.weight * prod * prod;
    }
    jit << fmt(r) << ',' << fmt(1.0 - errors::transfer_fidelity_jitter(paths, r, 1.0)) << ','
        << fmt(1.0 - quad) << ',' << fmt(1.0 - errors::transfer_fidelity_jitter(uniform, r, 1.0)) << ',';
    if (r <= 0.05) jit << fmt(1.0 - errors::uniform_jitter_approx(c.n, r, 1.0));
    jit << '\n';
  }
  out.write("errors_jitter.csv", jit.str());

  std::ostringstream en;
  en << "t0_dE,chain_fidelity,fidelity_exact,fidelity_approx\n";
  for (double x : c.energy_t0_de) {
    const auto f = errors::aggregate_energy_fidelity(c.n, x, 1.0);
    en << fmt(x) << ',' << fmt(errors::energy_fidelity(2, x, 1.0)) << ',' << fmt(f.exact) << ','
       << fmt(f.approx) << '\n';
  }
  out.write("errors_energy.csv", en.str());

  double inv_sum = 0.0;
  for (std::size_t k = 0; k < c.n; ++k)
    inv_sum += 1.0 / units::from_khz(c.omega_khz.size() == 1 ? c.omega_khz[0] : c.omega_khz[k]);
  errors::BudgetInputs in{static_cast<double>(c.n) / inv_sum, c.tau_ad_us,
                          std::abs(units::from_khz(c.chi_khz))};
  const auto b = errors::coherence_budget(c.n, in);
  json budget{{"n", b.n},
              {"q", b.q},
              {"tau1_us", b.tau1},
              {"qubit_lifetime_us", b.qubit_lifetime},
              {"photon_lifetime_us", b.photon_lifetime},
              {"tau2_us", b.tau2},
              {"kerr_photon_lifetime_us", b.kerr_photon_lifetime}};

  json j{{"budget", budget}};
  if (c.mode == "physical") {
    const auto plan = make_plan(c);
    const auto t0 = std::chrono::steady_clock::now();
    const auto stats = errors::monte_carlo_jitter(plan, amps, c.jitter_ratios, c.repetitions, c.seed);
    out.time("monte_carlo_jitter", seconds_since(t0));
    std::ostringstream mc;
    mc << "dt_over_t0,analytic_infidelity,measured_infidelity,measured_stderr,relative_error,"
          "state_fidelity\n";
    auto& rows = j["monte_carlo"] = json::array();
    for (const auto& s : stats) {
      mc << fmt(s.ratio) << ',' << fmt(s.analytic_infidelity) << ',' << fmt(s.measured_infidelity)
         << ',' << fmt(s.measured_stderr) << ',' << fmt(s.relative_error) << ','
         << fmt(s.state_fidelity) << '\n';
      rows.push_back({{"dt_over_t0", s.ratio},
                      {"analytic_infidelity", s.analytic_infidelity},
                      {"measured_infidelity", s.measured_infidelity},
                      {"relative_error", s.relative_error}});
    }
    out.write("errors_montecarlo.csv", mc.str());
  }
  out.write("errors.json", j.dump(2) + "\n");
  return j;
}

json cmd_resources(const ScenarioConfig& c, RunDirectory& out) {
  std::vector<phase_est::ResourceComparison> rows;
  json table = json::array();
  for (std::size_t n = c.n_min; n <= c.n_max; ++n) {
    rows.push_back(phase_est::resource_counts(n));
    const auto& r = rows.back();
    table.push_back({{"n", n},
                     {"conventional", r.conventional.total},
                     {"recycling", r.recycling.total},
                     {"oscillator", r.oscillator.total}});
  }
  out.write("resources.csv", phase_est::resources_csv(rows));
  out.write("resources.json", table.dump(2) + "\n");
  return table;
}

json cmd_wigner(const ScenarioConfig& c, RunDirectory& out) {
  auto r = qft_pipeline(c, &out);
  const auto q = r.rho_b.matrix().rows();
  const auto dim = q + static_cast<Eigen::Index>(c.wigner_pad);
  hilbert::Matrix rho = hilbert::Matrix::Zero(dim, dim);
  rho.topLeftCorner(q, q) = r.rho_b.matrix();
  hilbert::DensityMatrix padded(
      CompositeSpace({FockSpace{static_cast<std::size_t>(dim), FockRole::ResonatorB}}), rho);

  kerr::WignerOptions o;
  o.x_min = o.p_min = -c.wigner_extent;
  o.x_max = o.p_max = c.wigner_extent;
  o.nx = o.np = c.wigner_points;
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = kerr::wigner_grid(padded, o);
  out.time("wigner_grid", seconds_since(t0));
  out.write("wigner.csv", kerr::wigner_csv(g));

  json j;
  j["mode"] = c.mode;
  j["tau2_us"] = r.tau2;
  j["grid_integral"] = g.integral();
  j["wigner_at_origin"] = kerr::wigner_point(rho, 0.0);
  j["warnings"] = g.warnings;
  out.write("wigner.json", j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------- main

int run_main(int argc, char** argv) {
  CLI::App app{"Oscillator quantum Fourier transform simulator"};
  app.require_subcommand(1);

  std::string config_path, mode, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> fock_pad;
  std::optional<double> step_scale;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"transfer", "move a register state into resonator A"},
      {"qft", "transfer, cross-Kerr transform and disentangling"},
      {"phase", "phase estimation through the inverse transform"},
      {"errors", "jitter and energy error models, coherence budget"},
      {"resources", "operation counts of three phase-estimation layouts"},
      {"wigner", "Wigner function of the transformed B state"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "YAML scenario file");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--mode", mode, "ideal or physical")->check(CLI::IsMember({"ideal", "physical"}));
    sub->add_option("--fock-pad", fock_pad, "extra resonator A levels");
    sub->add_option("--step-scale", step_scale, "integration step scale in (0, 1]");
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!mode.empty()) cfg.mode = mode;
    if (fock_pad) cfg.fock_pad = *fock_pad;
    if (step_scale) cfg.step_scale = *step_scale;
    validate(cfg);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) cfg.out_dir = "runs/" + command;

    RunDirectory out(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    json summary;
    if (command == "transfer") summary = cmd_transfer(cfg, out);
    else if (command == "qft") summary = cmd_qft(cfg, out);
    else if (command == "phase") summary = cmd_phase(cfg, out);
    else if (command == "errors") summary = cmd_errors(cfg, out);
    else if (command == "resources") summary = cmd_resources(cfg, out);
    else summary = cmd_wigner(cfg, out);
    out.time("total", seconds_since(t0));
    out.finish(command, cfg, summary);
    std::cout << summary.dump(2) << '\n' << "wrote " << out.root().string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return 4;
  } catch (const DimensionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return 4;
  } catch (const SynthesisError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace oqft::cli
