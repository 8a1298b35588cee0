#include "geolab/ma_fiber.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "geolab/errors.hpp"
#include "geolab/regularize.hpp"

namespace geolab {
namespace {

void require_central2(const Background& bg) {
  if (bg.scheme() != Scheme::central2)
    fail(ErrorCode::unsupported_scheme, "fiber solvers need the central2 scheme");
}

void add_periodic_laplacian(std::vector<Eigen::Triplet<double>>& t, int n, double scale) {
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, (i + n - 1) % n, scale);
    t.emplace_back(i, i, -2.0 * scale);
    t.emplace_back(i, (i + 1) % n, scale);
  }
}

void d2_into(std::span<const double> u, std::vector<double>& out, double h) {
  out.resize(u.size());
  kernels::serial::second_difference_rows(u, out, static_cast<int>(u.size()), 1.0 / (h * h));
}

std::string coords(double t, double eps, double delta) {
  return "(t=" + std::to_string(t) + ", eps=" + std::to_string(eps) +
         ", delta=" + std::to_string(delta) + ")";
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace

FiberProblem make_fiber_problem(const Background& bg, PeriodicField beta, double epsilon) {
  return FiberProblem{bg, std::move(beta), epsilon, -1.0 * bg.r()};
}

void validate(const FiberProblem& p) {
  require(p.epsilon > 0.0, "epsilon must be positive");
  require(p.beta.grid() == p.bg.grid() && p.theta.grid() == p.bg.grid(),
          "fiber problem fields live on different grids");
  require(p.beta.min() >= -1e-12, "beta must be semipositive, min " + std::to_string(p.beta.min()));
  require(integrate(p.theta + p.beta) > 0.0, "int (theta + beta) must be positive");
}

PeriodicField aubin_residual(const FiberProblem& p, const PeriodicField& phi) {
  const double h = phi.grid().spacing();
  std::vector<double> d2;
  d2_into(phi.values(), d2, h);
  std::vector<double> f(d2.size());
  for (int i = 0; i < phi.size(); ++i)
    f[i] = p.epsilon * (p.theta[i] + p.beta[i]) + p.epsilon * d2[i] - p.bg.w()[i] * std::exp(phi[i]);
  return PeriodicField(phi.grid(), std::move(f));
}

FiberSolution solve_yau(const Background& bg, const PeriodicField& target) {
  require_central2(bg);
  require(target.grid() == bg.grid(), "target lives on a different grid");
  require(target.min() > 0.0, "target density must be positive");
  const double mass = integrate(target);
  if (std::abs(mass - 1.0) > 1e-10)
    fail(ErrorCode::incompatible_mass, "int target = " + std::to_string(mass) + ", expected 1");
  const int n = bg.grid().size();
  const double h = bg.grid().spacing();
  const auto& w = bg.w();

  // Unknowns (u_0..u_{n-1}, lambda); the multiplier absorbs the constant kernel of D^2.
  NewtonSystem sys;
  sys.residual = [&](std::span<const double> x, std::vector<double>& f) {
    std::vector<double> d2;
    d2_into(x.first(n), d2, h);
    f.assign(static_cast<std::size_t>(n + 1), 0.0);
    double avg = 0.0;
    for (int i = 0; i < n; ++i) {
      f[i] = w[i] + d2[i] + x[n] - target[i];
      avg += x[i] * w[i];
    }
    f[n] = h * avg;
  };
  sys.jacobian = [&](std::span<const double>) {
    std::vector<Eigen::Triplet<double>> t;
    add_periodic_laplacian(t, n, 1.0 / (h * h));
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, n, 1.0);
      t.emplace_back(n, i, h * w[i]);
    }
    SparseMatrix J(n + 1, n + 1);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };
  NewtonOptions opt;
  opt.tolerance = kFiberTolerance;
  auto res = damped_newton(sys, std::vector<double>(static_cast<std::size_t>(n + 1), 0.0), opt);
  res.x.resize(static_cast<std::size_t>(n));
  PeriodicField u(bg.grid(), std::move(res.x));
  const PeriodicField m = metric_density(bg, u);
  return FiberSolution{u, sup_distance(m, target), res.iterations, m.min(), std::move(res.history)};
}

FiberSolution solve_aubin_fiber(const FiberProblem& p, double tolerance) {
  validate(p);
  require_central2(p.bg);
  const int n = p.bg.grid().size();
  const double h = p.bg.grid().spacing();
  const double eps = p.epsilon;
  const auto& w = p.bg.w();
  std::vector<double> source(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) source[i] = eps * (p.theta[i] + p.beta[i]);

  NewtonSystem sys;
  sys.residual = [&](std::span<const double> x, std::vector<double>& f) {
    std::vector<double> d2;
    d2_into(x, d2, h);
    f.resize(x.size());
    for (int i = 0; i < n; ++i) f[i] = source[i] + eps * d2[i] - w[i] * std::exp(x[i]);
  };
  sys.jacobian = [&](std::span<const double> x) {
    std::vector<Eigen::Triplet<double>> t;
    add_periodic_laplacian(t, n, eps / (h * h));
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, -w[i] * std::exp(x[i]));
    SparseMatrix J(n, n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };
  NewtonOptions opt;
  opt.tolerance = tolerance;
  opt.max_iterations = 200;
  const double phi0 = std::log(eps * integrate(p.theta + p.beta));
  auto res = damped_newton(sys, std::vector<double>(static_cast<std::size_t>(n), phi0), opt);
  PeriodicField phi(p.bg.grid(), std::move(res.x));
  const PeriodicField form = p.theta + p.beta + second_derivative(phi, Scheme::central2);
  return FiberSolution{phi, res.residual, res.iterations, form.min(), std::move(res.history)};
}

FiberFamily solve_family(const Background& bg, const PathField& path,
                         const std::vector<double>& epsilons, const std::vector<double>& deltas) {
  require(!epsilons.empty() && !deltas.empty(), "epsilons and deltas must be nonempty");
  require(strictly_decreasing(epsilons), "epsilons must be strictly decreasing");
  require(strictly_decreasing(deltas), "deltas must be strictly decreasing");
  require(bg.grid() == path.grid(), "path and background grids differ");
  for (double e : epsilons) require(e > 0.0, "epsilons must be positive");

  FiberFamily fam;
  fam.grid = path.grid();
  fam.epsilons = epsilons;
  fam.deltas = deltas;
  for (int j = 0; j <= path.n_time(); ++j) fam.times.push_back(path.time(j));
  const int nt = path.n_time() + 1;
  const std::size_t ne = epsilons.size(), nd = deltas.size();

  // Mollified slices and the measured slack per delta.
  std::vector<std::vector<PeriodicField>> m_delta(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const PathField moll = mollify_fiberwise(path, MollifierSpec{deltas[d], MollifierKind::fiberwise});
    double min_m = 0.0;
    for (int j = 0; j < nt; ++j) {
      m_delta[d].push_back(metric_density(bg, moll.slice(j)));
      min_m = std::min(min_m, m_delta[d].back().min());
    }
    fam.slack_constants.push_back(std::max(0.0, -min_m) / deltas[d]);
  }
  for (int j = 0; j < nt; ++j)
    require(m_delta[0][j].min() > 0.0,
            "path slice " + std::to_string(j) + " is not admissible after mollification");

  fam.solutions.assign(ne, std::vector<std::vector<FiberSolution>>(nd));
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t d = 0; d < nd; ++d) {
      auto& row = fam.solutions[e][d];
      std::vector<std::optional<FiberSolution>> slots(static_cast<std::size_t>(nt));
      std::optional<Error> first_error;
      const double cd = fam.slack_constants[d] * deltas[d];
#pragma omp parallel for schedule(dynamic)
      for (int j = 0; j < nt; ++j) {
        try {
          const PeriodicField beta =
              (1.0 / epsilons[e]) * (m_delta[d][j] + cd * bg.w());
          slots[j] = solve_aubin_fiber(make_fiber_problem(bg, beta, epsilons[e]));
        } catch (const Error& err) {
#pragma omp critical
          if (!first_error) first_error = Error(err.code(), "at " + coords(fam.times[j], epsilons[e], deltas[d]) + ": " + err.detail());
        }
      }
      if (first_error) throw *first_error;
      for (auto& s : slots) row.push_back(std::move(*s));
    }

  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> inc;
    for (std::size_t d = 0; d + 1 < nd; ++d) {
      double m = 0.0;
      for (int j = 0; j < nt; ++j)
        m = std::max(m, sup_distance(fam.solutions[e][d][j].phi, fam.solutions[e][d + 1][j].phi));
      inc.push_back(m);
    }
    fam.cauchy_increments.push_back(std::move(inc));
    double L = 0.0;
    for (int j = 0; j + 1 < nt; ++j)
      L = std::max(L, sup_distance(fam.phi(e, j), fam.phi(e, j + 1)) / (fam.times[j + 1] - fam.times[j]));
    fam.equicontinuity.push_back(L);
    fam.equicontinuity_constant = std::max(fam.equicontinuity_constant, epsilons[e] * L);
  }
  return fam;
}

BoundReport check_bounds(const FiberFamily& fam) {
  require(!fam.solutions.empty(), "family is empty");
  BoundReport rep;
  const double h = fam.grid.spacing();
  std::vector<BoundStats> per_eps;
  for (std::size_t e = 0; e < fam.n_eps(); ++e) {
    const double eps = fam.epsilons[e];
    std::vector<BoundStats> row;
    BoundStats emax;
    for (const auto& sols : fam.solutions[e]) {
      BoundStats s;
      std::vector<double> d2;
      for (const auto& sol : sols) {
        s.sup_phi = std::max(s.sup_phi, sol.phi.max());
        s.neg_eps_inf_phi = std::max(s.neg_eps_inf_phi, -eps * sol.phi.min());
        d2_into(sol.phi.values(), d2, h);
        s.max_eps_d2_phi = std::max(s.max_eps_d2_phi, eps * sup_norm(d2));
      }
      emax.sup_phi = std::max(emax.sup_phi, s.sup_phi);
      emax.neg_eps_inf_phi = std::max(emax.neg_eps_inf_phi, s.neg_eps_inf_phi);
      emax.max_eps_d2_phi = std::max(emax.max_eps_d2_phi, s.max_eps_d2_phi);
      row.push_back(s);
    }
    rep.stats.push_back(std::move(row));
    per_eps.push_back(emax);
  }
  auto fold = [](BoundStats& acc, const BoundStats& s) {
    acc.sup_phi = std::max(acc.sup_phi, s.sup_phi);
    acc.neg_eps_inf_phi = std::max(acc.neg_eps_inf_phi, s.neg_eps_inf_phi);
    acc.max_eps_d2_phi = std::max(acc.max_eps_d2_phi, s.max_eps_d2_phi);
  };
  const std::size_t n = per_eps.size();
  for (std::size_t e = 0; e < n; ++e) {
    fold(rep.family_max, per_eps[e]);
    if (e < (n + 1) / 2) fold(rep.first_half_max, per_eps[e]);
    if (e >= n / 2) fold(rep.second_half_max, per_eps[e]);
  }
  const auto& a = rep.first_half_max;
  const auto& b = rep.second_half_max;
  rep.margin = std::min({1.5 * a.sup_phi - b.sup_phi, 1.5 * a.neg_eps_inf_phi - b.neg_eps_inf_phi,
                         1.5 * a.max_eps_d2_phi - b.max_eps_d2_phi});
  rep.pass = rep.margin >= 0.0;
  return rep;
}

std::vector<PeriodicField> default_test_set(const SpatialGrid& grid) {
  return {PeriodicField::constant(grid, 1.0),
          PeriodicField::sample(grid, [](double x) { return std::cos(kTwoPi * x); }),
          PeriodicField::sample(grid, [](double x) { return std::sin(kTwoPi * x); }),
          PeriodicField::sample(grid, [](double x) { return std::cos(2.0 * kTwoPi * x); }),
          PeriodicField::sample(grid, [](double x) { return std::sin(2.0 * kTwoPi * x); })};
}

ConvergenceReport density_convergence(const Background& bg, const FiberFamily& fam,
                                      const PathField& path,
                                      const std::vector<PeriodicField>& test_set) {
  require(!test_set.empty(), "test set must be nonempty");
  if (path.grid() != fam.grid || static_cast<std::size_t>(path.n_time() + 1) != fam.n_times())
    fail(ErrorCode::family_mismatch, "family and path grids disagree");
  ConvergenceReport rep;
  const std::size_t ne = fam.n_eps(), nt = fam.n_times();
  rep.errors.assign(test_set.size(), std::vector<std::vector<double>>(nt, std::vector<double>(ne)));
  rep.max_error.assign(ne, 0.0);
  rep.mass_error.assign(ne, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    const PeriodicField m = metric_density(bg, path.slice(static_cast<int>(t)));
    for (std::size_t e = 0; e < ne; ++e) {
      const PeriodicField dens = bg.w() * map(fam.phi(e, t), [](double v) { return std::exp(v); });
      const PeriodicField diff = dens - m;
      for (std::size_t q = 0; q < test_set.size(); ++q) {
        const double err = std::abs(integrate(diff * test_set[q]));
        rep.errors[q][t][e] = err;
        rep.max_error[e] = std::max(rep.max_error[e], err);
      }
      rep.mass_error[e] = std::max(rep.mass_error[e], std::abs(integrate(dens) - integrate(m)));
    }
  }
  double margin = 1e-2 - rep.max_error.back();
  for (std::size_t e = 1; e < ne; ++e)
    margin = std::min(margin, rep.max_error[e - 1] - rep.max_error[e] + 1e-15);
  rep.margin = margin;
  rep.pass = margin >= 0.0;
  return rep;
}

VanishingReport eps_phi_vanishing(const FiberFamily& fam) {
  require(fam.n_eps() >= 3, "eps_phi_vanishing needs at least 3 epsilons");
  VanishingReport rep;
  for (std::size_t e = 0; e < fam.n_eps(); ++e) {
    double m = 0.0;
    for (std::size_t t = 0; t < fam.n_times(); ++t) m = std::max(m, fam.epsilons[e] * fam.phi(e, t).sup_norm());
    rep.sup_eps_phi.push_back(m);
  }
  const auto& s = rep.sup_eps_phi;
  double margin = s.front() / 2.0 - s.back();
  for (std::size_t e = 1; e < s.size(); ++e) {
    if (s[e - 1] == 0.0 && s[e] == 0.0) continue;
    margin = std::min(margin, s[e - 1] - s[e]);
  }
  rep.margin = margin;
  rep.pass = margin >= 0.0;
  for (std::size_t e = 1; e < s.size(); ++e)
    if (!(s[e] < s[e - 1]) && !(s[e] == 0.0 && s[e - 1] == 0.0)) rep.pass = false;
  return rep;
}

double max_principle_excess(const FiberProblem& p, const FiberSolution& sol) {
  const auto& phi = sol.phi;
  const auto it = std::max_element(phi.values().begin(), phi.values().end());
  const int i = static_cast<int>(it - phi.values().begin());
  return phi[i] - std::log(p.epsilon * (p.theta[i] + p.beta[i]) / p.bg.w()[i]);
}

std::vector<double> stability_constants(const FiberProblem& p, const std::vector<double>& etas) {
  const FiberSolution base = solve_aubin_fiber(p);
  const PeriodicField bump = PeriodicField::sample(p.bg.grid(), [](double x) { return std::cos(kTwoPi * x) + 1.0; });
  std::vector<double> out;
  for (double eta : etas) {
    FiberProblem q = p;
    q.beta = p.beta + eta * bump;
    out.push_back(sup_distance(solve_aubin_fiber(q).phi, base.phi) / eta);
  }
  return out;
}

double comparison_principle_margin(const Background& bg, const PeriodicField& u, const PeriodicField& v) {
  const PeriodicField mu = metric_density(bg, u);
  const PeriodicField mv = metric_density(bg, v);
  const double h = bg.grid().spacing();
  double acc = 0.0;
  for (int i = 0; i < u.size(); ++i)
    if (u[i] < v[i]) acc += mu[i] - mv[i];
  return h * acc;
}

}  // namespace geolab
