#pragma once

#include <cmath>
#include <vector>

#include "geolab/model.hpp"

namespace geolab::test {

inline PeriodicField cos_field(const SpatialGrid& g, double a, int k = 1) {
  return PeriodicField::sample(g, [a, k](double x) { return a * std::cos(kTwoPi * k * x); });
}

inline PeriodicField sin_field(const SpatialGrid& g, double a, int k = 1) {
  return PeriodicField::sample(g, [a, k](double x) { return a * std::sin(kTwoPi * k * x); });
}

// The cos endpoint pair used throughout: 0 and the canonical amplitude.
inline PeriodicField zero(const SpatialGrid& g) { return PeriodicField::constant(g, 0.0); }
inline PeriodicField canonical(const SpatialGrid& g) { return cos_field(g, kCanonicalAmplitude); }

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace geolab::test
