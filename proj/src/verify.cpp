#include "geolab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "geolab/errors.hpp"
#include "geolab/kernels.hpp"

namespace geolab {
namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double min_of(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return m;
}

constexpr double kEpsMach = std::numeric_limits<double>::epsilon();

// (min + tol * scale + floor) / scale; 0 when the quantity is round-off noise.
double relative_margin(double min_value, double scale, double tol, double floor = 0.0, double scale_floor = -1.0) {
  if (scale <= (scale_floor < 0.0 ? floor : scale_floor)) return 0.0;
  return (min_value + tol * scale + floor) / scale;
}

// Round-off level of trace values: every slice sums O(1) terms (unit mass).
double value_floor(const FunctionalTrace& tr) {
  double m = std::max(1.0, tr.scale());
  for (double v : tr.energy_part) m = std::max(m, std::abs(v));
  for (double v : tr.entropy_part) m = std::max(m, std::abs(v));
  return 64.0 * kEpsMach * m;
}

double second_difference_floor(const FunctionalTrace& tr) {
  const double ds = tr.times[1] - tr.times[0];
  return 4.0 * value_floor(tr) / (ds * ds);
}

std::vector<double> rows_d2(const std::vector<double>& a, int n, double h) {
  std::vector<double> out(a.size());
  kernels::parallel::second_difference_rows(a, out, n, 1.0 / (h * h));
  return out;
}

std::vector<double> rows_d1(const std::vector<double>& a, int n, double h) {
  std::vector<double> out(a.size());
  kernels::parallel::first_difference_rows(a, out, n, 1.0 / (2.0 * h));
  return out;
}

void check_family(const PathField& path, const FiberFamily& family, int k) {
  require(k >= 1, "k must be >= 1");
  if (family.grid != path.grid() || family.n_times() != static_cast<std::size_t>(path.n_time() + 1))
    fail(ErrorCode::family_mismatch, "family grid or times do not match the path");
  if (static_cast<std::size_t>(k) > family.n_eps())
    fail(ErrorCode::family_mismatch, "k exceeds the number of epsilons in the family");
}

PeriodicField subsample(const PeriodicField& u, int factor) {
  std::vector<double> v;
  for (int i = 0; i < u.size(); i += factor) v.push_back(u[i]);
  const SpatialGrid grid(static_cast<int>(v.size()));
  return PeriodicField(grid, std::move(v));
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::passed: return "passed";
    case Outcome::failed: return "failed";
    case Outcome::skipped: return "skipped";
  }
  return "failed";
}

PropertyResult make_result(std::string name, double margin, json details) {
  PropertyResult r;
  r.name = std::move(name);
  r.margin = margin;
  r.outcome = margin >= 0.0 ? Outcome::passed : Outcome::failed;
  r.details = details.is_null() ? json::object() : std::move(details);
  return r;
}

PropertyResult skipped_result(std::string name, std::string reason) {
  PropertyResult r;
  r.name = std::move(name);
  r.outcome = Outcome::skipped;
  r.margin = std::numeric_limits<double>::quiet_NaN();
  r.details["reason"] = std::move(reason);
  return r;
}

json to_json(const PropertyResult& r) {
  json j;
  j["name"] = r.name;
  j["outcome"] = std::string(to_string(r.outcome));
  j["pass"] = r.pass();
  if (std::isnan(r.margin))
    j["margin"] = nullptr;
  else
    j["margin"] = r.margin;
  j["details"] = r.details;
  return j;
}

void validate(const Background& bg, const DensitySequence& seq) {
  auto check = [&](const PeriodicField& f, const std::string& what) {
    if (f.grid() != bg.grid()) fail(ErrorCode::invalid_sequence, what + " lives on a different grid");
    if (f.min() < 0.0 || f.max() > seq.bound)
      fail(ErrorCode::invalid_sequence, what + " leaves [0, bound]");
    const double mass = integrate(f * bg.w());
    if (std::abs(mass - 1.0) > 1e-10)
      fail(ErrorCode::invalid_sequence, what + " has mass " + std::to_string(mass));
  };
  if (seq.members.empty()) fail(ErrorCode::invalid_sequence, "sequence has no members");
  check(seq.f_limit, "limit");
  for (std::size_t i = 0; i < seq.members.size(); ++i) check(seq.members[i], "member " + std::to_string(i));
}

DensitySequence oscillating_sequence(const Background& bg, const PeriodicField& f_limit,
                                     double amplitude, int count, double phase) {
  const int n = bg.grid().size();
  if (!(std::abs(amplitude) < 1.0))
    fail(ErrorCode::invalid_sequence, "oscillation amplitude must satisfy |a| < 1");
  if (count < 1 || count > n / 4)
    fail(ErrorCode::invalid_sequence, "member count must lie in [1, N/4]");
  if (f_limit.min() < 0.0) fail(ErrorCode::invalid_sequence, "limit density must be nonnegative");
  DensitySequence seq{f_limit, {}, 0.0};
  double min_z = kInf;
  for (int i = 1; i <= count; ++i) {
    const PeriodicField osc = PeriodicField::sample(
        bg.grid(), [&](double x) { return 1.0 + amplitude * std::sin(kTwoPi * i * x + phase); });
    const PeriodicField raw = f_limit * osc;
    const double z = integrate(raw * bg.w());
    min_z = std::min(min_z, z);
    seq.members.push_back((1.0 / z) * raw);
  }
  seq.bound = f_limit.max() * (1.0 + std::abs(amplitude)) / min_z * (1.0 + 1e-12);
  validate(bg, seq);
  return seq;
}

DensitySequence random_oscillating_sequence(const Background& bg, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<FourierTerm> terms{{0, 1.0, 0.0}};
  double budget = 0.6;
  for (int k = 1; k <= 3; ++k) {
    const double amp = budget * unit(rng) * 0.8;
    budget -= amp;
    const double th = kTwoPi * unit(rng);
    terms.push_back({k, amp * std::cos(th), amp * std::sin(th)});
  }
  const PeriodicField raw = fourier_field(bg.grid(), terms);
  const PeriodicField f = (1.0 / integrate(raw * bg.w())) * raw;
  const double a = -0.9 + 1.8 * unit(rng);
  const double phase = kTwoPi * unit(rng);
  return oscillating_sequence(bg, f, a, count, phase);
}

PropertyResult entropy_semicontinuity(const Background& bg, const DensitySequence& seq) {
  validate(bg, seq);
  const double h_lim = entropy_of_ratio(bg, seq.f_limit);
  std::vector<double> gaps;
  for (const auto& f : seq.members) gaps.push_back(entropy_of_ratio(bg, f) - h_lim);
  const std::size_t tail = gaps.size() - std::max<std::size_t>(1, gaps.size() / 3);
  const double tail_min = *std::min_element(gaps.begin() + static_cast<std::ptrdiff_t>(tail), gaps.end());
  json d;
  d["limit_entropy"] = h_lim;
  d["gaps"] = gaps;
  d["tail_min"] = tail_min;
  return make_result("entropy_semicontinuity", tail_min + 1e-6, std::move(d));
}

PropertyResult truncated_semicontinuity(const Background& bg, const DensitySequence& seq,
                                        const TruncationSpec& spec) {
  validate(spec);
  validate(bg, seq);
  const DeltaA dA = delta_A(bg, spec);
  const double h_lim = truncated_entropy_of_ratio(bg, seq.f_limit, spec);
  std::vector<double> gaps;
  for (const auto& f : seq.members) gaps.push_back(truncated_entropy_of_ratio(bg, f, spec) - h_lim);
  const std::size_t tail = gaps.size() - std::max<std::size_t>(1, gaps.size() / 3);
  const double tail_min = *std::min_element(gaps.begin() + static_cast<std::ptrdiff_t>(tail), gaps.end());
  json d;
  d["A"] = spec.A;
  d["C1"] = dA.C1;
  d["C2"] = dA.C2;
  d["delta"] = dA.delta;
  d["gaps"] = gaps;
  d["tail_min"] = tail_min;
  return make_result("truncated_semicontinuity", tail_min + dA.delta + 1e-6, std::move(d));
}

PropertyResult truncated_semicontinuity_sweep(const Background& bg, const DensitySequence& seq,
                                              const PeriodicField& chi, const std::vector<double>& levels) {
  require(!levels.empty(), "A sweep needs at least one level");
  double margin = kInf;
  double prev_delta = kInf;
  json per = json::array();
  for (double A : levels) {
    const TruncationSpec spec{A, chi};
    const PropertyResult r = truncated_semicontinuity(bg, seq, spec);
    const double delta = r.details["delta"].get<double>();
    margin = std::min({margin, r.margin, prev_delta - delta});
    prev_delta = delta;
    per.push_back({{"A", A}, {"delta", delta}, {"margin", r.margin}});
  }
  json d;
  d["levels"] = per;
  return make_result("truncated_semicontinuity_sweep", margin, std::move(d));
}

PropertyResult convexity_inequality_k(const Background& bg, const PathField& path,
                                      const FiberFamily& family, int k) {
  check_family(path, family, k);
  const int n = path.n_points(), nt = path.n_time();
  const double h = path.grid().spacing(), ds = path.time_step();
  const std::size_t rows = static_cast<std::size_t>(nt + 1);

  std::vector<double> L(rows * n);
  double max_L = 0.0;
  for (std::size_t j = 0; j < rows; ++j)
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int e = 0; e < k; ++e) acc += std::exp(family.phi(e, j)[i]);
      L[j * n + i] = std::log(acc / k);
      max_L = std::max(max_L, std::abs(L[j * n + i]));
    }
  const std::vector<double> Lxx = rows_d2(L, n, h);
  const std::vector<double> Lx = rows_d1(L, n, h);
  const ReducedHessian G = reduced_hessian(bg, path);

  std::vector<double> md;
  md.reserve(static_cast<std::size_t>(nt - 1) * n);
  double max_alpha = 0.0, max_beta = 0.0;
  for (int j = 1; j < nt; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t c = std::size_t(j) * n + i;
      const double a_xx = Lxx[c] - bg.r()[i];
      const double a_ss = (L[c + n] - 2.0 * L[c] + L[c - n]) / (ds * ds);
      const double a_xs = (Lx[c + n] - Lx[c - n]) / (2.0 * ds);
      md.push_back(a_xx * G.ss(j, i) + a_ss * G.xx(j, i) - 2.0 * a_xs * G.xs(j, i));
      max_alpha = std::max(max_alpha, std::abs(a_xx) + std::abs(a_ss) + 2.0 * std::abs(a_xs));
      max_beta = std::max(max_beta, std::abs(G.xx(j, i)) + std::abs(G.ss(j, i)) + 2.0 * std::abs(G.xs(j, i)));
    }
  double max_path = 0.0;
  for (double v : path.values()) max_path = std::max(max_path, std::abs(v));
  // Round-off of the difference quotients, propagated through the bilinear form.
  const double stencil = 16.0 * kEpsMach * (1.0 / (h * h) + 1.0 / (ds * ds) + 1.0 / (h * ds));
  const double md_floor =
      stencil * (std::max(1.0, max_L) * max_beta + std::max(1.0, max_path) * max_alpha);
  const double md_min = min_of(md), md_scale = max_abs(md);
  const double margin13 = relative_margin(md_min, md_scale, 1e-6, md_floor);

  // Exact discrete log-sum-exp convexity along x, s and both diagonals.
  double lse_min = kInf;
  const int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  std::vector<double> lam(static_cast<std::size_t>(k));
  auto phi_at = [&](int e, int j, int i) { return family.phi(e, j)[((i % n) + n) % n]; };
  for (int j = 1; j < nt; ++j)
    for (int i = 0; i < n; ++i) {
      double z = 0.0;
      for (int e = 0; e < k; ++e) z += (lam[e] = std::exp(phi_at(e, j, i)));
      for (auto& d : dirs) {
        const int jp = j + d[0], jm = j - d[0];
        const int ip = ((i + d[1]) % n + n) % n, im = ((i - d[1]) % n + n) % n;
        const double lhs = L[std::size_t(jp) * n + ip] + L[std::size_t(jm) * n + im] - 2.0 * L[std::size_t(j) * n + i];
        double rhs = 0.0;
        for (int e = 0; e < k; ++e)
          rhs += lam[e] / z * (phi_at(e, jp, ip) + phi_at(e, jm, im) - 2.0 * phi_at(e, j, i));
        lse_min = std::min(lse_min, lhs - rhs);
      }
    }
  const double margin14 = lse_min + 1e-13 * std::max(1.0, max_L);

  json d;
  d["k"] = k;
  d["mixed_det_min"] = md_min;
  d["mixed_det_scale"] = md_scale;
  d["mixed_det_roundoff"] = md_floor;
  d["mixed_det_margin"] = margin13;
  d["lse_convexity_min"] = lse_min;
  d["lse_convexity_margin"] = margin14;
  return make_result("convexity_inequality_k", std::min(margin13, margin14), std::move(d));
}

CurvatureFields curvature_fields(const Background& bg, const EpsGeodesic& eg) {
  const PathField& P = eg.path;
  const int n = P.n_points(), nt = P.n_time();
  const double h = P.grid().spacing(), ds = P.time_step(), eps = eg.epsilon;
  const std::vector<double> vals(P.values().begin(), P.values().end());
  std::vector<double> m = rows_d2(vals, n, h);
  for (std::size_t c = 0; c < m.size(); ++c) m[c] += bg.w()[static_cast<int>(c % n)];
  std::vector<double> L(m.size()), ratio(m.size());
  for (std::size_t c = 0; c < m.size(); ++c) {
    require(m[c] > 0.0, "eps-geodesic slice density must be positive");
    L[c] = std::log(m[c]);
    ratio[c] = bg.w()[static_cast<int>(c % n)] / m[c];
  }
  const std::vector<double> Lxx = rows_d2(L, n, h), Lx = rows_d1(L, n, h), Px = rows_d1(vals, n, h);
  const std::vector<double> ratio_xx = rows_d2(ratio, n, h);

  CurvatureFields f;
  f.n_points = n;
  f.rows = nt - 1;
  std::vector<double> a(static_cast<std::size_t>(nt - 1) * n);
  for (int j = 1; j < nt; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t c = std::size_t(j) * n + i;
      const double pxs = (Px[c + n] - Px[c - n]) / (2.0 * ds);
      const double aa = pxs / m[c];
      a[std::size_t(j - 1) * n + i] = aa;
      const double Lss = (L[c + n] - 2.0 * L[c] + L[c - n]) / (ds * ds);
      const double Lxs = (Lx[c + n] - Lx[c - n]) / (2.0 * ds);
      f.q_ineq.push_back(Lss - 2.0 * aa * Lxs + aa * aa * Lxx[c]);
      f.rhs.push_back(eps * ratio_xx[c] / m[c]);
    }
  const std::vector<double> ax = rows_d1(a, n, h);
  for (double v : ax) f.grad_a_sq.push_back(v * v);
  return f;
}

double curvature_identity_residual(const CurvatureFields& f, double kappa) {
  double r = 0.0;
  for (std::size_t c = 0; c < f.q_ineq.size(); ++c)
    r = std::max(r, std::abs(f.q_ineq[c] - f.rhs[c] - kappa * f.grad_a_sq[c]));
  return r;
}

PropertyResult eps_curvature_identity(const Background& bg, const EpsGeodesic& eg,
                                      const CurvatureOptions& opt) {
  if (!(eg.residual_sup <= kGeodesicTolerance) || !(eg.certificate_residual <= kGeodesicTolerance))
    fail(ErrorCode::not_a_solution, "path residual " + std::to_string(eg.certificate_residual) +
                                        " exceeds " + std::to_string(kGeodesicTolerance));
  require(opt.levels >= 2, "the refinement study needs at least two levels");

  const CurvatureFields fine = curvature_fields(bg, eg);
  std::vector<double> diff(fine.q_ineq.size());
  for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = fine.q_ineq[c] - fine.rhs[c];
  const double ineq_min = min_of(diff), ineq_scale = max_abs(fine.q_ineq);
  const double margin_a = relative_margin(ineq_min, ineq_scale, 1e-6);

  // Level 0 is eg itself; level l halves both grids l times.
  std::vector<CurvatureFields> levels{fine};
  bool resolved = true;
  for (int l = 1; l < opt.levels; ++l) {
    const int f = 1 << l;
    if (!(eg.path.n_points() % (2 * f) == 0 && eg.path.n_points() / f >= 8 && eg.path.n_time() % f == 0 &&
          eg.path.n_time() / f >= 8)) {
      resolved = false;
      break;
    }
    const Background cbg = make_background(subsample(bg.psi(), f), bg.scheme());
    const EpsGeodesicProblem p{cbg, subsample(eg.path.endpoint_0(), f), subsample(eg.path.endpoint_1(), f),
                               eg.epsilon, eg.path.n_time() / f};
    levels.push_back(curvature_fields(cbg, solve_eps_geodesic(p)));
  }

  json fit = json::array();
  double best_kappa = opt.kappa_candidates.empty() ? opt.kappa : opt.kappa_candidates.front();
  double best_res = kInf;
  for (double kap : opt.kappa_candidates) {
    const double r = curvature_identity_residual(fine, kap);
    fit.push_back({{"kappa", kap}, {"residual", r}});
    if (r < best_res) {
      best_res = r;
      best_kappa = kap;
    }
  }

  std::vector<double> residuals, ratios;
  for (const auto& lv : levels) residuals.push_back(curvature_identity_residual(lv, opt.kappa));
  double margin_b = kInf;
  const bool exact = *std::max_element(residuals.begin(), residuals.end()) <= 1e-12;
  for (std::size_t l = 0; !exact && l + 1 < residuals.size(); ++l) {
    const double ratio = residuals[l + 1] / residuals[l];
    ratios.push_back(ratio);
    margin_b = std::min({margin_b, ratio - 3.0, 5.0 - ratio});
  }
  if (exact) margin_b = 0.0;
  if (!resolved || !std::isfinite(margin_b)) margin_b = std::min(margin_b, -1.0);

  json d;
  d["kappa"] = opt.kappa;
  d["fitted_kappa"] = best_kappa;
  d["kappa_fit"] = fit;
  d["inequality_min"] = ineq_min;
  d["inequality_scale"] = ineq_scale;
  d["inequality_margin"] = margin_a;
  d["identity_residuals_fine_to_coarse"] = residuals;
  d["refinement_ratios"] = ratios;
  d["levels_resolved"] = resolved;
  d["exact_at_roundoff"] = exact;
  d["identity_margin"] = margin_b;
  return make_result("eps_curvature_identity", std::min(margin_a, margin_b), std::move(d));
}

PropertyResult eps_geodesic_residual_c(const Background& bg, const EpsGeodesic& eg) {
  const ReducedHessian H = reduced_hessian(bg, eg.path);
  double r_c = 0.0, r_det = 0.0;
  for (int j = 1; j < eg.path.n_time(); ++j)
    for (int i = 0; i < eg.path.n_points(); ++i) {
      const double m = H.xx(j, i), pxs = H.xs(j, i), pss = H.ss(j, i);
      const double c = pss - pxs * pxs / m;
      r_c = std::max(r_c, std::abs(c - eg.epsilon * bg.w()[i] / m));
      r_det = std::max(r_det, std::abs(m * (pss - c) - pxs * pxs));
    }
  json d;
  d["c_residual"] = r_c;
  d["rho_det_residual"] = r_det;
  return make_result("eps_geodesic_residual_c", 1e-9 - std::max(r_c, r_det), std::move(d));
}

double almost_convexity_constant(const FunctionalTrace& trace, double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  const double tol = 1e-8 * trace.scale() + second_difference_floor(trace);
  double worst = 0.0;
  for (double sd : trace.second_differences)
    if (!std::isnan(sd)) worst = std::max(worst, -sd - tol);
  return worst / (2.0 * epsilon);
}

PropertyResult mabuchi_eps_A_almost_convex(const std::vector<FunctionalTrace>& traces, double C_A_bound) {
  require(traces.size() >= 3, "almost-convexity needs at least 3 eps traces");
  const double A = traces.front().meta.value("A", 0.0);
  std::vector<double> eps, C;
  for (const auto& tr : traces) {
    require(tr.meta.contains("epsilon"), "trace meta lacks epsilon");
    require(tr.meta.value("A", 0.0) == A, "traces must share a common A");
    eps.push_back(tr.meta["epsilon"].get<double>());
    C.push_back(almost_convexity_constant(tr, eps.back()));
  }
  for (std::size_t k = 1; k < eps.size(); ++k) require(eps[k] < eps[k - 1], "traces must be ordered by decreasing eps");
  double margin = C_A_bound - *std::max_element(C.begin(), C.end());
  for (std::size_t k = 1; k < C.size(); ++k) margin = std::min(margin, C[k - 1] - C[k]);
  json d;
  d["A"] = A;
  d["epsilons"] = eps;
  d["C_hat"] = C;
  d["C_A_bound"] = C_A_bound;
  return make_result("mabuchi_eps_A_almost_convex", margin, std::move(d));
}

PropertyResult mabuchi_convexity_and_continuity(const Background& bg, const PathField& path,
                                                const PathField* refined, const FiberFamily& family,
                                                const ContinuityOptions& opt) {
  const FunctionalTrace M = mabuchi(bg, path);
  const int n = path.n_time();
  const auto& v = M.values;
  const double scale = M.scale();
  json d;

  const double sd_min = M.min_second_difference();
  const double v_floor = value_floor(M);
  const double m_convex = relative_margin(sd_min, scale, opt.convexity_tol, second_difference_floor(M), v_floor);
  d["second_difference_min"] = sd_min;
  d["scale"] = scale;
  d["convexity_margin"] = m_convex;

  const double g0 = std::abs(v[1] - v[0]), g1 = std::abs(v[n - 1] - v[n]);
  const double osc0 = std::abs(v[2] - v[1]), osc1 = std::abs(v[n - 2] - v[n - 1]);
  double m_gap = std::min(3.0 * osc0 + opt.gap_abs_tol - g0, 3.0 * osc1 + opt.gap_abs_tol - g1);
  d["boundary_gaps"] = {g0, g1};
  d["boundary_gap_allowance"] = {3.0 * osc0 + opt.gap_abs_tol, 3.0 * osc1 + opt.gap_abs_tol};
  if (refined) {
    const FunctionalTrace R = mabuchi(bg, *refined);
    const int nr = refined->n_time();
    const double r0 = std::abs(R.values[1] - R.values[0]);
    const double r1 = std::abs(R.values[nr - 1] - R.values[nr]);
    d["refined_boundary_gaps"] = {r0, r1};
    auto dec = [&](double coarse, double fine) {
      return coarse <= v_floor && fine <= v_floor ? 0.0 : coarse - fine;
    };
    m_gap = std::min({m_gap, dec(g0, r0), dec(g1, r1)});
  }
  d["continuity_margin"] = m_gap;

  // Finite-grid one-sided bounds at both ends: chord above, entropy floor below.
  const double t1 = path.time(1);
  const double chord0 = (1.0 - t1) * v[0] + t1 * v[n];
  const double chord1 = t1 * v[0] + (1.0 - t1) * v[n];
  const double tol = opt.convexity_tol * scale + v_floor;
  const double m_semi = std::min({chord0 - v[1] + tol, chord1 - v[n - 1] + tol,
                                  v[1] - v[0] + opt.gap_abs_tol, v[n - 1] - v[n] + opt.gap_abs_tol});
  d["semicontinuity_margin"] = m_semi;

  double m_k = kInf;
  double prev_dist = kInf;
  json per_k = json::array();
  for (int k : opt.k_list) {
    if (static_cast<std::size_t>(k) > family.n_eps()) continue;
    const FunctionalTrace Mk = mabuchi_k(bg, path, family, k);
    double dist = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) dist = std::max(dist, std::abs(Mk.values[j] - v[j]));
    const double mk =
        relative_margin(Mk.min_second_difference(), Mk.scale(), opt.k_convexity_tol,
                        second_difference_floor(Mk), value_floor(Mk));
    const double dec = (prev_dist == kInf) ? kInf : prev_dist - dist + std::max(v_floor, value_floor(Mk));
    m_k = std::min({m_k, mk, dec});
    prev_dist = dist;
    per_k.push_back({{"k", k}, {"second_difference_min", Mk.min_second_difference()},
                     {"scale", Mk.scale()}, {"convexity_margin", mk}, {"distance_to_mabuchi", dist}});
  }
  if (m_k == kInf) m_k = 0.0;
  d["mabuchi_k"] = per_k;
  d["mabuchi_k_margin"] = m_k;

  return make_result("mabuchi_convexity_and_continuity", std::min({m_convex, m_gap, m_semi, m_k}), std::move(d));
}

std::vector<PeriodicField> bump_test_family(const SpatialGrid& grid) {
  std::vector<PeriodicField> fam{PeriodicField::constant(grid, 1.0)};
  for (int c = 0; c < 8; ++c)
    for (int p : {2, 8}) {
      const double center = c / 8.0;
      fam.push_back(PeriodicField::sample(grid, [&](double x) {
        return std::pow(0.5 * (1.0 + std::cos(kTwoPi * (x - center))), p);
      }));
    }
  return fam;
}

PropertyResult max_subharmonic_lemma(const Background& bg, const PeriodicField& u, const PeriodicField& v,
                                     double tol, bool check_hypotheses) {
  const PeriodicField mu = metric_density(bg, u);
  const PeriodicField mv = metric_density(bg, v);
  double hyp_v = kInf, hyp_u = kInf;
  for (int i = 0; i < u.size(); ++i) {
    hyp_v = std::min(hyp_v, mv[i]);
    if (u[i] > v[i] - 1.0) hyp_u = std::min(hyp_u, mu[i]);
  }
  const bool hypotheses = hyp_v >= -tol && hyp_u >= -tol;
  if (check_hypotheses && !hypotheses)
    return skipped_result("max_subharmonic_lemma", "SkippedHypothesis: min w + D^2 v = " + std::to_string(hyp_v) +
                                                       ", min w + D^2 u on {u > v - 1} = " + std::to_string(hyp_u));
  std::vector<double> vmax(static_cast<std::size_t>(u.size()));
  for (int i = 0; i < u.size(); ++i) vmax[i] = std::max(u[i], v[i]);
  const PeriodicField M(u.grid(), std::move(vmax));
  double margin = kInf;
  std::vector<double> pairings;
  for (const auto& xi : bump_test_family(u.grid())) {
    const double d2_part = integrate(M * second_derivative(xi, bg.scheme()));
    pairings.push_back(d2_part);
    margin = std::min(margin, d2_part + integrate(bg.w() * xi) + tol * integrate(xi));
  }
  json d;
  d["hypotheses_hold"] = hypotheses;
  d["pairings"] = pairings;
  return make_result("max_subharmonic_lemma", margin, std::move(d));
}

}  // namespace geolab
