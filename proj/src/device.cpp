#include "oqft/device.hpp"

#include <cmath>
#include <string>

#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

namespace oqft::dynamics {

DeviceParams DeviceParams::nominal(std::size_t n) {
  DeviceParams p;
  p.omega_A = units::from_mhz(5000.0);
  p.omega_B = units::from_mhz(7000.0);
  p.detuning_start = units::from_mhz(1000.0);
  p.omega_q.assign(n, p.omega_A + p.detuning_start);
  p.g = {units::from_mhz(200.0)};
  p.chi_AB = units::from_khz(-50.0);
  p.alpha = units::from_mhz(-200.0);
  p.tau_ad = 0.1;
  return p;
}

double DeviceParams::coupling(std::size_t k) const {
  if (g.empty()) throw PreconditionError("device: no coupling g given");
  if (g.size() == 1) return g.front();
  if (k >= g.size())
    throw DimensionError("device: no coupling for qubit " + std::to_string(k));
  return g[k];
}

double DeviceParams::qubit_frequency(std::size_t k) const {
  if (k >= omega_q.size())
    throw DimensionError("device: no frequency for qubit " + std::to_string(k));
  return omega_q[k];
}

void DeviceParams::validate(std::size_t n) const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(omega_A) || omega_A <= 0.0)
    throw PreconditionError("device: omega_A must be positive");
  if (!finite(omega_B)) throw PreconditionError("device: omega_B must be finite");
  if (g.empty() || (g.size() != 1 && g.size() != n))
    throw PreconditionError("device: give one shared g or one per qubit");
  for (double gk : g)
    if (!finite(gk) || gk <= 0.0) throw PreconditionError("device: g must be > 0");
  if (!omega_q.empty() && omega_q.size() != n)
    throw PreconditionError("device: omega_q needs one entry per qubit");
  if (!finite(tau_ad) || tau_ad <= 0.0)
    throw PreconditionError("device: tau_ad must be > 0");
  if (!finite(chi_AB) || !finite(alpha) || !finite(detuning_start))
    throw PreconditionError("device: non-finite parameter");
}

DeviceParams::Adiabaticity DeviceParams::adiabaticity(std::size_t k) const {
  Adiabaticity a{};
  const double rate = 1.0 / tau_ad;
  a.ratio_g = rate / std::abs(coupling(k));
  a.ratio_alpha = alpha == 0.0 ? INFINITY : rate / std::abs(alpha);
  a.ok = a.ratio_g <= 0.1 && a.ratio_alpha <= 0.1;
  return a;
}

double dressed_energy(std::size_t m, DressedSign sign, double omega_A, double g) {
  const double md = static_cast<double>(m);
  switch (sign) {
    case DressedSign::Ground:
      if (m != 0) throw PreconditionError("dressed_energy: ground level needs m = 0");
      return 0.0;
    case DressedSign::Plus:
    case DressedSign::Minus: {
      if (m == 0) throw PreconditionError("dressed_energy: sign given with m = 0");
      const double split = std::sqrt(md) * g;
      return md * omega_A + (sign == DressedSign::Plus ? split : -split);
    }
    case DressedSign::Edge:
      // |m-1, 1> with no partner inside the truncation.
      return md * omega_A;
  }
  return 0.0;
}

double dressed_energy(std::size_t m, DressedSign sign, const DeviceParams& params,
                      std::size_t k) {
  return dressed_energy(m, sign, params.omega_A, params.coupling(k));
}

}  // namespace oqft::dynamics
