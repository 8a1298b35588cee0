#include "geolab/conjugate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "geolab/errors.hpp"
#include "fftw_lock.hpp"

namespace geolab {

LowerHull lower_convex_hull(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "hull needs at least two matching samples");
  LowerHull h;
  h.x.reserve(x.size());
  h.y.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k > 0) require(x[k] > x[k - 1], "hull abscissae must be strictly increasing");
    while (h.x.size() >= 2) {
      const std::size_t a = h.x.size() - 2, b = h.x.size() - 1;
      // Drop b when it lies on or above the segment from a to k.
      const double cross = (h.x[b] - h.x[a]) * (y[k] - h.y[a]) - (h.y[b] - h.y[a]) * (x[k] - h.x[a]);
      if (cross <= 0.0) {
        h.x.pop_back();
        h.y.pop_back();
      } else {
        break;
      }
    }
    h.x.push_back(x[k]);
    h.y.push_back(y[k]);
  }
  return h;
}

double hull_excess(std::span<const double> x, std::span<const double> y, const LowerHull& hull) {
  double excess = 0.0;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (seg + 2 < hull.x.size() && hull.x[seg + 1] <= x[k]) ++seg;
    const double t = (x[k] - hull.x[seg]) / (hull.x[seg + 1] - hull.x[seg]);
    const double yh = hull.y[seg] + t * (hull.y[seg + 1] - hull.y[seg]);
    excess = std::max(excess, y[k] - yh);
  }
  return excess;
}

PiecewiseConjugate conjugate_of_hull(const LowerHull& hull) {
  PiecewiseConjugate c;
  c.x = hull.x;
  c.c = hull.y;
  for (std::size_t k = 0; k + 1 < hull.x.size(); ++k)
    c.breaks.push_back((hull.y[k + 1] - hull.y[k]) / (hull.x[k + 1] - hull.x[k]));
  return c;
}

PiecewiseConjugate interpolate(const PiecewiseConjugate& a, const PiecewiseConjugate& b, double s) {
  PiecewiseConjugate out;
  std::size_t ia = 0, ib = 0;
  while (true) {
    out.x.push_back((1.0 - s) * a.x[ia] + s * b.x[ib]);
    out.c.push_back((1.0 - s) * a.c[ia] + s * b.c[ib]);
    const bool more_a = ia < a.breaks.size(), more_b = ib < b.breaks.size();
    if (!more_a && !more_b) break;
    if (more_a && (!more_b || a.breaks[ia] < b.breaks[ib])) {
      out.breaks.push_back(a.breaks[ia++]);
    } else if (more_b && (!more_a || b.breaks[ib] < a.breaks[ia])) {
      out.breaks.push_back(b.breaks[ib++]);
    } else {
      out.breaks.push_back(a.breaks[ia]);
      ++ia;
      ++ib;
    }
  }
  return out;
}

std::vector<double> conjugate_back(const PiecewiseConjugate& conj, std::span<const double> nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  std::size_t m = 0;
  for (double x : nodes) {
    require(x >= conj.x.front() && x <= conj.x.back(), "node outside the conjugate's slope range");
    while (m + 1 < conj.x.size() && conj.x[m + 1] <= x) ++m;
    if (m + 1 == conj.x.size()) {
      out.push_back(conj.c.back());  // x equals the last slope
      continue;
    }
    // Supremum attained at the break between pieces m and m + 1.
    out.push_back(conj.c[m] + (x - conj.x[m]) * conj.breaks[m]);
  }
  return out;
}

std::vector<double> trig_interpolate(std::span<const double> u, int factor) {
  const int n = static_cast<int>(u.size());
  const int m = n * factor;
  require(n % 2 == 0 && factor >= 1, "trig interpolation needs an even sample count");
  std::vector<double> in(u.begin(), u.end());
  std::vector<double> out(static_cast<std::size_t>(m));
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1)));
  std::fill_n(&spec[0][0], 2 * (m / 2 + 1), 0.0);
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, in.data(), spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(m, spec, out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  if (factor > 1) {
    // Split the Nyquist coefficient between +n/2 and -n/2.
    spec[n / 2][0] *= 0.5;
    spec[n / 2][1] = 0.0;
  }
  fftw_execute(bwd);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(spec);
  for (double& v : out) v /= n;
  return out;
}

}  // namespace geolab
