#pragma once

// Periodic Gaussian mollification of path potentials, fiberwise (in x only)
// and in space-time (x and s, on an interior band of time rows).

#include "geolab/kernels.hpp"
#include "geolab/model.hpp"

namespace geolab {

enum class MollifierKind { fiberwise, spacetime };

struct MollifierSpec {
  double delta;  // standard deviation, in units of the period; 0 < delta <= 0.25
  MollifierKind kind;
};

void validate(const MollifierSpec& spec);

// Samples of exp(-y^2 / 2 delta^2) at y = k h for |k| <= ceil(6 delta / h),
// renormalized to unit sum and folded onto offsets mod n_points.
kernels::Stencil gaussian_stencil(int n_points, double delta);

// Symmetric weights w_{-R..R} for the s-direction with spacing ds, truncated at radius R.
std::vector<double> gaussian_weights(double delta, double ds, int radius);

struct Mollified {
  PathField path;
  // Slack C with m_xx[phi_delta] >= (nearby min of m_xx[phi]) - C delta, measured.
  double lower_bound_constant;
  int band_first;  // first and last smoothed time rows
  int band_last;
};

// Every slice (endpoints included) is convolved in x.
Mollified mollify_fiberwise(const Background& bg, const PathField& path, const MollifierSpec& spec);
PathField mollify_fiberwise(const PathField& path, const MollifierSpec& spec);

// x-convolution then s-convolution on rows b..n_time-b with b = ceil(delta n_time) + 1.
// Near the band edge the s-kernel is cut to the symmetric radius min(R, j, n_time - j).
// Rows outside the band are returned unchanged. Throws InteriorTooThin when
// n_time < 8 or the band is empty.
Mollified mollify_spacetime(const Background& bg, const PathField& path, const MollifierSpec& spec);
PathField mollify_spacetime(const PathField& path, const MollifierSpec& spec);

PeriodicField mollify(const PeriodicField& u, double delta);

}  // namespace geolab
