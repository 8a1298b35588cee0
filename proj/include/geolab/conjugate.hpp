#pragma once

// Exact convex conjugates of piecewise-linear convex functions.
//
// A sampled function (x_k, y_k) is replaced by its lower convex hull; the
// conjugate of the hull is piecewise linear in the slope variable, with one
// piece per hull vertex.

#include <span>
#include <vector>

namespace geolab {

struct LowerHull {
  std::vector<double> x;
  std::vector<double> y;
};

// x strictly increasing. Monotone-chain lower hull, linear time.
LowerHull lower_convex_hull(std::span<const double> x, std::span<const double> y);

// max_k (y_k - hull(x_k)) >= 0; zero exactly when every sample is on its hull.
double hull_excess(std::span<const double> x, std::span<const double> y, const LowerHull& hull);

// P*(p) = x_k p - c_k on [breaks_{k-1}, breaks_k] (open-ended at both ends).
struct PiecewiseConjugate {
  std::vector<double> x;       // piece slopes, nondecreasing
  std::vector<double> c;       // piece offsets
  std::vector<double> breaks;  // x.size() - 1 slope breakpoints, nondecreasing
};

PiecewiseConjugate conjugate_of_hull(const LowerHull& hull);

// (1 - s) a + s b on the merged breakpoints.
PiecewiseConjugate interpolate(const PiecewiseConjugate& a, const PiecewiseConjugate& b, double s);

// sup_p (x p - P*(p)) at increasing nodes inside [x.front(), x.back()].
std::vector<double> conjugate_back(const PiecewiseConjugate& conj, std::span<const double> nodes);

// Band-limited trigonometric interpolant of periodic samples at factor times the resolution.
std::vector<double> trig_interpolate(std::span<const double> u, int factor);

}  // namespace geolab
