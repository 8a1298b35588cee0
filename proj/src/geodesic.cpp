#include "geolab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "geolab/conjugate.hpp"
#include "geolab/errors.hpp"
#include "geolab/kernels.hpp"

namespace geolab {

void validate(const EpsGeodesicProblem& p) {
  require(p.epsilon > 0.0, "epsilon must be positive");
  require(p.n_time >= 8, "n_time must be at least 8");
  require(p.endpoint_0.grid() == p.bg.grid() && p.endpoint_1.grid() == p.bg.grid(),
          "endpoints live on a different grid");
  require(is_admissible(p.bg, p.endpoint_0), "endpoint_0 is not admissible");
  require(is_admissible(p.bg, p.endpoint_1), "endpoint_1 is not admissible");
}

PathField eps_geodesic_initial_guess(const EpsGeodesicProblem& p) {
  PathField lin = PathField::linear(p.endpoint_0, p.endpoint_1, p.n_time);
  std::vector<double> v(lin.values().begin(), lin.values().end());
  const int n = lin.n_points();
  for (int j = 1; j < p.n_time; ++j) {
    const double s = lin.time(j);
    const double corr = 0.5 * p.epsilon * (s * s - s);
    for (int i = 0; i < n; ++i) v[std::size_t(j) * n + i] += corr;
  }
  return PathField(lin.grid(), p.n_time, std::move(v));
}

std::vector<double> eps_geodesic_residual(const Background& bg, const PathField& path, double epsilon) {
  const int n = path.n_points();
  std::vector<double> out(static_cast<std::size_t>(path.n_time() - 1) * n);
  kernels::parallel::ma_residual(path.values(), bg.w().values(), epsilon, n, path.n_time(),
                                 path.grid().spacing(), path.time_step(), out);
  return out;
}

double certificate_residual(const Background& bg, const PathField& path, double epsilon) {
  const ReducedHessian H = reduced_hessian(bg, path);
  double r = 0.0;
  for (int j = 1; j < path.n_time(); ++j)
    for (int i = 0; i < path.n_points(); ++i)
      r = std::max(r, std::abs(H.det(j, i) - epsilon * bg.w()[i]));
  return r;
}

EpsGeodesic solve_eps_geodesic(const EpsGeodesicProblem& p, const PathField* warm_start,
                               const NewtonOptions& options) {
  validate(p);
  if (p.bg.scheme() != Scheme::central2)
    fail(ErrorCode::unsupported_scheme, "the eps-geodesic solver needs the central2 scheme");
  const int n = p.bg.grid().size();
  const int nt = p.n_time;
  const double h = p.bg.grid().spacing();
  const double ds = 1.0 / nt;
  const double eps = p.epsilon;
  const std::size_t row = static_cast<std::size_t>(n);
  const std::size_t n_unknown = static_cast<std::size_t>(nt - 1) * row;

  PathField start = eps_geodesic_initial_guess(p);
  if (warm_start) {
    require(warm_start->grid() == p.bg.grid() && warm_start->n_time() == nt,
            "warm start has the wrong shape");
    std::vector<double> v(warm_start->values().begin(), warm_start->values().end());
    std::copy(p.endpoint_0.values().begin(), p.endpoint_0.values().end(), v.begin());
    std::copy(p.endpoint_1.values().begin(), p.endpoint_1.values().end(), v.begin() + nt * row);
    start = PathField(p.bg.grid(), nt, std::move(v));
  }

  // Full path buffer with fixed boundary rows; x holds the interior rows.
  std::vector<double> full(start.values().begin(), start.values().end());
  auto load = [&](std::span<const double> x) { std::copy(x.begin(), x.end(), full.begin() + row); };
  const auto& w = p.bg.w().values();

  std::vector<double> m_xx(n_unknown), m_xs(n_unknown), m_ss(n_unknown);
  auto hessian = [&](std::span<const double> x) {
    load(x);
    kernels::parallel::reduced_hessian(full, w, n, nt, h, ds, kernels::HessianRows{m_xx, m_xs, m_ss});
  };

  NewtonSystem sys;
  sys.residual = [&](std::span<const double> x, std::vector<double>& f) {
    load(x);
    f.resize(n_unknown);
    kernels::parallel::ma_residual(full, w, eps, n, nt, h, ds, f);
  };
  sys.admissible = [&](std::span<const double> x) {
    hessian(x);
    for (std::size_t k = 0; k < n_unknown; ++k)
      if (!(m_xx[k] > 0.0 && m_ss[k] > 0.0)) return false;
    return true;
  };
  sys.jacobian = [&](std::span<const double> x) {
    hessian(x);
    const double ih2 = 1.0 / (h * h), ids2 = 1.0 / (ds * ds), i4 = 1.0 / (4.0 * h * ds);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(n_unknown * 9);
    auto idx = [&](int jj, int ii) { return (jj - 1) * n + ((ii % n) + n) % n; };
    for (int j = 1; j < nt; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(j - 1) * row + i;
        const int r = static_cast<int>(k);
        const double mss = m_ss[k], mxx = m_xx[k], c = -2.0 * m_xs[k] * i4;
        t.emplace_back(r, idx(j, i - 1), mss * ih2);
        t.emplace_back(r, idx(j, i + 1), mss * ih2);
        t.emplace_back(r, idx(j, i), -2.0 * mss * ih2 - 2.0 * mxx * ids2);
        if (j > 1) {
          t.emplace_back(r, idx(j - 1, i), mxx * ids2);
          t.emplace_back(r, idx(j - 1, i + 1), -c);
          t.emplace_back(r, idx(j - 1, i - 1), c);
        }
        if (j < nt - 1) {
          t.emplace_back(r, idx(j + 1, i), mxx * ids2);
          t.emplace_back(r, idx(j + 1, i + 1), c);
          t.emplace_back(r, idx(j + 1, i - 1), -c);
        }
      }
    SparseMatrix J(static_cast<Eigen::Index>(n_unknown), static_cast<Eigen::Index>(n_unknown));
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };

  std::vector<double> x0(start.values().begin() + row, start.values().begin() + nt * row);
  NewtonOptions opt = options;
  opt.tolerance = std::min(opt.tolerance, kGeodesicTolerance);
  NewtonResult res = damped_newton(sys, std::move(x0), opt);

  load(res.x);
  EpsGeodesic out{PathField(p.bg.grid(), nt, full), eps, res.residual, 0.0, 0.0, res.iterations,
                  std::move(res.history)};
  out.certificate_residual = certificate_residual(p.bg, out.path, eps);
  const ReducedHessian H = reduced_hessian(p.bg, out.path);
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 1; j < nt; ++j)
    for (int i = 0; i < n; ++i) margin = std::min({margin, H.det(j, i), H.xx(j, i), H.ss(j, i)});
  out.positivity_margin = margin;
  return out;
}

WeakGeodesic weak_geodesic(const Background& bg, const PeriodicField& endpoint_0,
                           const PeriodicField& endpoint_1, const std::vector<double>& eps_sequence,
                           int n_time) {
  require(eps_sequence.size() >= 3, "eps sequence needs at least 3 entries");
  for (std::size_t k = 1; k < eps_sequence.size(); ++k)
    require(eps_sequence[k] < eps_sequence[k - 1], "eps sequence must be strictly decreasing");
  WeakGeodesic wg;
  for (double eps : eps_sequence) {
    const EpsGeodesicProblem p{bg, endpoint_0, endpoint_1, eps, n_time};
    const PathField* warm = wg.solves.empty() ? nullptr : &wg.solves.back().path;
    wg.solves.push_back(solve_eps_geodesic(p, warm));
    if (wg.solves.size() >= 2)
      wg.increments.push_back(sup_distance(wg.solves[wg.solves.size() - 2].path, wg.solves.back().path));
  }
  return wg;
}

PathField legendre_oracle(const Background& bg, const PeriodicField& endpoint_0,
                          const PeriodicField& endpoint_1, int n_time) {
  require(n_time >= 1, "n_time must be positive");
  require(endpoint_0.grid() == bg.grid() && endpoint_1.grid() == bg.grid(),
          "endpoints live on a different grid");
  require(is_admissible(bg, endpoint_0) && is_admissible(bg, endpoint_1),
          "oracle endpoints must be admissible");
  constexpr int kRefine = 4;
  const int n = bg.grid().size();
  const int m = kRefine * n;

  std::vector<double> fine_x(static_cast<std::size_t>(3 * m));
  for (int k = 0; k < 3 * m; ++k) fine_x[k] = static_cast<double>(k - m) / m;

  auto dual = [&](const PeriodicField& phi) {
    std::vector<double> sum(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sum[i] = bg.psi()[i] + phi[i];
    std::vector<double> fine = trig_interpolate(sum, kRefine);
    for (int i = 0; i < n; ++i) fine[std::size_t(i) * kRefine] = sum[i];
    std::vector<double> P(fine_x.size());
    for (int k = 0; k < 3 * m; ++k) P[k] = 0.5 * fine_x[k] * fine_x[k] + fine[k % m];
    const LowerHull hull = lower_convex_hull(fine_x, P);
    const double excess = hull_excess(fine_x, P, hull);
    if (excess > 1e-8)
      fail(ErrorCode::non_convex_input,
           "x^2/2 + psi + phi lies " + std::to_string(excess) + " above its convex hull");
    return conjugate_of_hull(hull);
  };
  const PiecewiseConjugate c0 = dual(endpoint_0);
  const PiecewiseConjugate c1 = dual(endpoint_1);

  std::vector<double> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodes[i] = bg.grid().node(i);
  std::vector<double> values(static_cast<std::size_t>(n_time + 1) * n);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= n_time; ++j) {
    const double s = static_cast<double>(j) / n_time;
    const std::vector<double> P = conjugate_back(interpolate(c0, c1, s), nodes);
    for (int i = 0; i < n; ++i)
      values[std::size_t(j) * n + i] = P[i] - 0.5 * nodes[i] * nodes[i] - bg.psi()[i];
  }
  return PathField(bg.grid(), n_time, std::move(values));
}

}  // namespace geolab
