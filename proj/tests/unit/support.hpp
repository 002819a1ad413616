#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include "oqft/hilbert.hpp"

namespace oqft::test {

using hilbert::cplx;
using hilbert::Vector;

/// Haar-ish random unit vector (normalized complex Gaussian).
inline Vector random_unit(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(gauss(rng), gauss(rng));
  return v / v.norm();
}

inline hilbert::StateVector random_state(const hilbert::CompositeSpace& space,
                                         std::mt19937_64& rng) {
  return hilbert::StateVector(space, random_unit(static_cast<Eigen::Index>(space.dim()), rng));
}

}  // namespace oqft::test
