#include "geolab/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "geolab/errors.hpp"

namespace geolab {
namespace {

int ceil_ratio(double a, double b) { return static_cast<int>(std::ceil(a / b - 1e-12)); }

std::vector<double> m_xx_rows(const Background& bg, const PathField& path) {
  const int n = path.n_points();
  const double h = path.grid().spacing();
  std::vector<double> out(path.values().size());
  kernels::parallel::second_difference_rows(path.values(), out, n, 1.0 / (h * h));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bg.w()[static_cast<int>(k % n)];
  return out;
}

// max over nodes of (min of before over an (rx, rs) box) - after, over rows [first, last].
double lower_bound_slack(const std::vector<double>& before, const std::vector<double>& after,
                         int n, int n_time, int rx, int rs, int first, int last) {
  double slack = 0.0;
  for (int j = first; j <= last; ++j) {
    const int j0 = std::max(0, j - rs), j1 = std::min(n_time, j + rs);
    for (int i = 0; i < n; ++i) {
      double lo = std::numeric_limits<double>::infinity();
      for (int jj = j0; jj <= j1; ++jj)
        for (int d = -rx; d <= rx; ++d) {
          const int ii = ((i + d) % n + n) % n;
          lo = std::min(lo, before[std::size_t(jj) * n + ii]);
        }
      slack = std::max(slack, lo - after[std::size_t(j) * n + i]);
    }
  }
  return slack;
}

PathField convolve_x(const PathField& path, double delta) {
  const auto st = gaussian_stencil(path.n_points(), delta);
  std::vector<double> out(path.values().size());
  kernels::parallel::convolve_rows(path.values(), out, path.n_points(), st);
  return PathField(path.grid(), path.n_time(), std::move(out));
}

}  // namespace

void validate(const MollifierSpec& spec) {
  require(spec.delta > 0.0 && spec.delta <= 0.25,
          "mollifier delta must lie in (0, 0.25], got " + std::to_string(spec.delta));
}

kernels::Stencil gaussian_stencil(int n_points, double delta) {
  require(n_points > 0 && delta > 0.0, "gaussian stencil needs n_points > 0 and delta > 0");
  const double h = 1.0 / n_points;
  const int radius = ceil_ratio(6.0 * delta, h);
  std::vector<double> folded(static_cast<std::size_t>(n_points), 0.0);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double y = k * h;
    const double g = std::exp(-y * y / (2.0 * delta * delta));
    folded[static_cast<std::size_t>(((k % n_points) + n_points) % n_points)] += g;
    total += g;
  }
  kernels::Stencil st;
  for (int off = 0; off < n_points; ++off) {
    if (folded[off] == 0.0) continue;
    st.offsets.push_back(off);
    st.weights.push_back(folded[off] / total);
  }
  return st;
}

std::vector<double> gaussian_weights(double delta, double ds, int radius) {
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double y = k * ds;
    g[k + radius] = std::exp(-y * y / (2.0 * delta * delta));
    total += g[k + radius];
  }
  for (double& v : g) v /= total;
  return g;
}

PeriodicField mollify(const PeriodicField& u, double delta) {
  const auto st = gaussian_stencil(u.size(), delta);
  std::vector<double> out(static_cast<std::size_t>(u.size()));
  kernels::serial::convolve_rows(u.values(), out, u.size(), st);
  return PeriodicField(u.grid(), std::move(out));
}

Mollified mollify_fiberwise(const Background& bg, const PathField& path, const MollifierSpec& spec) {
  validate(spec);
  require(spec.kind == MollifierKind::fiberwise, "mollify_fiberwise needs a fiberwise spec");
  PathField out = convolve_x(path, spec.delta);
  const int rx = ceil_ratio(spec.delta, path.grid().spacing());
  const double slack = lower_bound_slack(m_xx_rows(bg, path), m_xx_rows(bg, out), path.n_points(),
                                         path.n_time(), rx, 0, 0, path.n_time());
  return Mollified{std::move(out), slack / spec.delta, 0, path.n_time()};
}

PathField mollify_fiberwise(const PathField& path, const MollifierSpec& spec) {
  validate(spec);
  require(spec.kind == MollifierKind::fiberwise, "mollify_fiberwise needs a fiberwise spec");
  return convolve_x(path, spec.delta);
}

Mollified mollify_spacetime(const Background& bg, const PathField& path, const MollifierSpec& spec) {
  validate(spec);
  require(spec.kind == MollifierKind::spacetime, "mollify_spacetime needs a spacetime spec");
  const int nt = path.n_time();
  const int n = path.n_points();
  if (nt < 8) fail(ErrorCode::interior_too_thin, "n_time = " + std::to_string(nt) + " < 8");
  const int b = ceil_ratio(spec.delta, 1.0 / nt) + 1;
  if (b > nt - b)
    fail(ErrorCode::interior_too_thin,
         "no interior rows for delta = " + std::to_string(spec.delta) + ", n_time = " + std::to_string(nt));

  const PathField xs = convolve_x(path, spec.delta);
  const double ds = path.time_step();
  const int rs_full = ceil_ratio(6.0 * spec.delta, ds);
  std::vector<double> out(path.values().begin(), path.values().end());
#pragma omp parallel for schedule(static)
  for (int j = b; j <= nt - b; ++j) {
    const int r = std::min({rs_full, j, nt - j});
    const auto g = gaussian_weights(spec.delta, ds, r);
    double* o = out.data() + std::size_t(j) * n;
    for (int i = 0; i < n; ++i) o[i] = 0.0;
    for (int k = -r; k <= r; ++k) {
      const auto src = xs.row(j + k);
      const double gk = g[k + r];
      for (int i = 0; i < n; ++i) o[i] += gk * src[i];
    }
  }
  PathField smoothed(path.grid(), nt, std::move(out));
  const int rx = ceil_ratio(spec.delta, path.grid().spacing());
  const int rs = ceil_ratio(spec.delta, ds);
  const double slack =
      lower_bound_slack(m_xx_rows(bg, path), m_xx_rows(bg, smoothed), n, nt, rx, rs, b, nt - b);
  return Mollified{std::move(smoothed), slack / spec.delta, b, nt - b};
}

PathField mollify_spacetime(const PathField& path, const MollifierSpec& spec) {
  return mollify_spacetime(flat_background(path.grid()), path, spec).path;
}

}  // namespace geolab
