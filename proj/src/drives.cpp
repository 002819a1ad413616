#include "oqft/drives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

namespace oqft::drives {

using dynamics::DressedSign;
using dynamics::dressed_energy;

namespace {

std::string level(std::size_t m, DressedSign s) {
  std::ostringstream os;
  os << '|' << m << ',' << (s == DressedSign::Plus ? '+' : '-') << '>';
  return os.str();
}

void check_guard_band(const DrivePulse& pulse) {
  const auto& c = pulse.components;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i].frequency > 0.0))
      throw SynthesisError("drive: non-positive frequency for " + c[i].transition);
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double gap = std::abs(c[i].frequency - c[j].frequency);
      if (gap < pulse.guard_band) {
        std::ostringstream os;
        os << "drive components collide: " << c[i].transition << " (m=" << c[i].m
           << ", l=" << c[i].l << ") and " << c[j].transition << " (m=" << c[j].m
           << ", l=" << c[j].l << ") are " << units::to_mhz(gap)
           << " MHz apart, guard band " << units::to_mhz(pulse.guard_band) << " MHz";
        throw SynthesisError(os.str());
      }
    }
  }
}

DrivePulse empty_pulse(std::size_t k, double omega, const SynthesisOptions& options) {
  if (!(omega > 0.0)) throw PreconditionError("drive: Omega must be > 0");
  DrivePulse p;
  p.k = k;
  p.omega_ref = omega;
  p.duration = units::kPi / omega;
  p.guard_band = options.guard_band_factor * omega;
  return p;
}

}  // namespace

double DrivePulse::evaluate(double t) const {
  double f = 0.0;
  for (const auto& c : components) f += c.amplitude * std::cos(c.frequency * t);
  return f;
}

double DrivePulse::max_frequency() const {
  double f = 0.0;
  for (const auto& c : components) f = std::max(f, std::abs(c.frequency));
  return f;
}

OccupiedSet occupied_photon_numbers(std::size_t n, std::size_t k) {
  if (k >= n)
    throw DimensionError("occupied_photon_numbers: k=" + std::to_string(k) +
                         " out of range for n=" + std::to_string(n));
  OccupiedSet s{n, k, {}};
  const std::size_t spacing = std::size_t{1} << (k + 1);
  const std::size_t count = std::size_t{1} << (n - k - 1);
  for (std::size_t j = 0; j < count; ++j) s.photons.push_back(j * spacing);
  return s;
}

std::vector<std::pair<std::size_t, double>> transfer_frequencies(std::size_t k, std::size_t m,
                                                                 double omega_A, double g) {
  if (k == 0)
    throw PreconditionError("transfer_frequencies: k = 0 uses the photon-preserving drive");
  std::vector<std::pair<std::size_t, double>> out;
  const std::size_t last = (std::size_t{1} << k) - 1;
  for (std::size_t l = 1; l <= last; ++l) {
    const std::size_t lo = m + l;
    double w;
    if (l % 2 == 0)
      w = dressed_energy(lo + 1, DressedSign::Plus, omega_A, g) -
          dressed_energy(lo, DressedSign::Minus, omega_A, g);
    else
      w = dressed_energy(lo + 1, DressedSign::Minus, omega_A, g) -
          dressed_energy(lo, DressedSign::Plus, omega_A, g);
    out.emplace_back(l, w);
  }
  return out;
}

DrivePulse synthesize_transfer_drive(std::size_t k, const OccupiedSet& occupied, double omega,
                                     const dynamics::DeviceParams& params,
                                     const SynthesisOptions& options) {
  if (k == 0)
    throw PreconditionError("synthesize_transfer_drive: k = 0 uses the photon-preserving drive");
  DrivePulse p = empty_pulse(k, omega, options);
  const double g = params.coupling(k);
  const double N = static_cast<double>(std::size_t{1} << k);
  for (std::size_t m : occupied.photons) {
    for (auto [l, w] : transfer_frequencies(k, m, params.omega_A, g)) {
      const double ld = static_cast<double>(l);
      const double sign = (l % 2 == 1) ? 1.0 : -1.0;
      DriveComponent c;
      c.amplitude = sign * 2.0 * omega * std::sqrt(ld * (N - ld));
      c.frequency = w;
      c.m = m;
      c.l = l;
      const bool odd = l % 2 == 1;
      c.transition = level(m + l, odd ? DressedSign::Plus : DressedSign::Minus) + " <-> " +
                     level(m + l + 1, odd ? DressedSign::Minus : DressedSign::Plus);
      p.components.push_back(std::move(c));
    }
  }
  check_guard_band(p);
  return p;
}

DrivePulse synthesize_photon_preserving_drive(const OccupiedSet& occupied, double omega,
                                              const dynamics::DeviceParams& params,
                                              const SynthesisOptions& options) {
  if (occupied.k != 0)
    throw PreconditionError("synthesize_photon_preserving_drive: requires k = 0");
  DrivePulse p = empty_pulse(0, omega, options);
  const double g = params.coupling(0);
  const double wa = params.omega_A;
  for (std::size_t m0 : occupied.photons) {
    const double top = dressed_energy(m0 + 2, DressedSign::Plus, wa, g);
    DriveComponent plus;
    plus.amplitude = -2.0 * std::sqrt(2.0) * omega;
    plus.frequency = top - dressed_energy(m0 + 1, DressedSign::Plus, wa, g);
    plus.m = m0;
    plus.l = 1;
    plus.transition = level(m0 + 1, DressedSign::Plus) + " <-> " + level(m0 + 2, DressedSign::Plus);
    DriveComponent one;
    one.amplitude = 2.0 * std::sqrt(2.0) * omega;
    one.frequency = top - dressed_energy(m0 + 1, DressedSign::Minus, wa, g);
    one.m = m0;
    one.l = 2;
    one.transition = level(m0 + 1, DressedSign::Minus) + " <-> " + level(m0 + 2, DressedSign::Plus);
    p.components.push_back(std::move(plus));
    p.components.push_back(std::move(one));
  }
  check_guard_band(p);
  return p;
}

DrivePulse synthesize_drive(const OccupiedSet& occupied, double omega,
                            const dynamics::DeviceParams& params,
                            const SynthesisOptions& options) {
  if (occupied.k == 0) return synthesize_photon_preserving_drive(occupied, omega, params, options);
  return synthesize_transfer_drive(occupied.k, occupied, omega, params, options);
}

std::vector<double> perfect_chain_couplings(std::size_t node_count, double omega) {
  if (node_count < 2) throw PreconditionError("perfect_chain_couplings: need N >= 2");
  std::vector<double> c;
  const double N = static_cast<double>(node_count);
  for (std::size_t l = 1; l < node_count; ++l) {
    const double ld = static_cast<double>(l);
    c.push_back(0.5 * omega * std::sqrt(ld * (N - ld)));
  }
  return c;
}

double evaluate_pulse(const DrivePulse& pulse, double t) {
  if (t < 0.0 || t > pulse.duration * (1.0 + 1e-12))
    throw PreconditionError("evaluate_pulse: t outside [0, duration]");
  return pulse.evaluate(t);
}

nlohmann::ordered_json to_json(const DrivePulse& pulse) {
  nlohmann::ordered_json j;
  j["k"] = pulse.k;
  j["omega_ref_rad_per_us"] = pulse.omega_ref;
  j["duration_us"] = pulse.duration;
  j["guard_band_rad_per_us"] = pulse.guard_band;
  auto& comps = j["components"] = nlohmann::ordered_json::array();
  for (const auto& c : pulse.components) {
    comps.push_back({{"m", c.m},
                     {"l", c.l},
                     {"amplitude_rad_per_us", c.amplitude},
                     {"frequency_rad_per_us", c.frequency},
                     {"frequency_mhz", units::to_mhz(c.frequency)},
                     {"transition", c.transition}});
  }
  return j;
}

}  // namespace oqft::drives
