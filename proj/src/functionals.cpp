#include "geolab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "geolab/errors.hpp"

namespace geolab {
namespace {

constexpr double kNegativeDensityTol = 1e-10;

double xlogy_checked(double f, double logarg) { return f == 0.0 ? 0.0 : f * std::log(logarg); }

void check_density(const PeriodicField& m, const std::string& where) {
  const double lo = m.min();
  if (lo < -kNegativeDensityTol)
    fail(ErrorCode::negative_density, where + ": density minimum " + std::to_string(lo));
}

double clamp0(double v) { return v < 0.0 ? 0.0 : v; }

// Runs body(j) for every slice, slices in parallel, values written by index.
template <class Body>
std::vector<double> per_slice(int rows, Body body) {
  std::vector<double> out(static_cast<std::size_t>(rows));
  std::vector<std::string> errors(static_cast<std::size_t>(rows));
  std::vector<int> codes(static_cast<std::size_t>(rows), -1);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < rows; ++j) {
    try {
      out[j] = body(j);
    } catch (const Error& e) {
      codes[j] = static_cast<int>(e.code());
      errors[j] = e.detail();
    }
  }
  for (int j = 0; j < rows; ++j)
    if (codes[j] >= 0) fail(static_cast<ErrorCode>(codes[j]), "slice " + std::to_string(j) + ": " + errors[j]);
  return out;
}

std::vector<double> path_times(const PathField& path) {
  std::vector<double> t;
  for (int j = 0; j <= path.n_time(); ++j) t.push_back(path.time(j));
  return t;
}

}  // namespace

TruncationSpec make_truncation(const SpatialGrid& grid, double A) {
  return TruncationSpec{A, PeriodicField::constant(grid, 0.0)};
}

void validate(const TruncationSpec& spec) {
  require(spec.A >= 1.0, "truncation level A must be >= 1, got " + std::to_string(spec.A));
}

double FunctionalTrace::scale() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double FunctionalTrace::min_second_difference() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : second_differences)
    if (!std::isnan(v)) m = std::min(m, v);
  return m;
}

FunctionalTrace make_trace(std::string name, std::vector<double> times, std::vector<double> values) {
  require(times.size() == values.size() && times.size() >= 2, "trace needs matching times and values");
  for (std::size_t k = 1; k < times.size(); ++k) require(times[k] > times[k - 1], "trace times must increase");
  FunctionalTrace tr;
  tr.name = std::move(name);
  tr.times = std::move(times);
  tr.values = std::move(values);
  const std::size_t n = tr.values.size();
  tr.second_differences.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double ds = tr.times[k + 1] - tr.times[k];
    tr.second_differences[k] = (tr.values[k - 1] - 2.0 * tr.values[k] + tr.values[k + 1]) / (ds * ds);
  }
  return tr;
}

double energy(const Background& bg, const PeriodicField& u) {
  return integrate(u * (metric_density(bg, u) + bg.w()));
}

double energy_alpha(const PeriodicField& u, const PeriodicField& alpha) { return integrate(u * alpha); }

double entropy_of_ratio(const Background& bg, const PeriodicField& f) {
  check_density(f, "entropy");
  const double h = f.grid().spacing();
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double fi = clamp0(f[i]);
    acc += xlogy_checked(fi, fi) * bg.w()[i];
  }
  return h * acc;
}

double entropy(const Background& bg, const PeriodicField& u) {
  const PeriodicField m = metric_density(bg, u);
  check_density(m, "entropy");
  const double h = m.grid().spacing();
  double acc = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    const double mi = clamp0(m[i]);
    acc += xlogy_checked(mi, mi / bg.w()[i]);
  }
  return h * acc;
}

double truncated_entropy_of_ratio(const Background& bg, const PeriodicField& f, const TruncationSpec& spec) {
  validate(spec);
  check_density(f, "truncated entropy");
  const double h = f.grid().spacing();
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double fi = clamp0(f[i]);
    if (fi == 0.0) continue;
    acc += fi * std::max(std::log(fi), spec.chi[i] - spec.A) * bg.w()[i];
  }
  return h * acc;
}

double truncated_entropy(const Background& bg, const PeriodicField& u, const TruncationSpec& spec) {
  const PeriodicField m = metric_density(bg, u);
  check_density(m, "truncated entropy");
  std::vector<double> f(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.size(); ++i) f[i] = clamp0(m[i]) / bg.w()[i];
  return truncated_entropy_of_ratio(bg, PeriodicField(m.grid(), std::move(f)), spec);
}

DeltaA delta_A(const Background& bg, const TruncationSpec& spec) {
  validate(spec);
  const double h = bg.grid().spacing();
  double c1 = 0.0, c2 = 0.0;
  for (int i = 0; i < bg.grid().size(); ++i) {
    const double g = spec.chi[i] - spec.A;
    const double e = std::exp(g) * bg.w()[i];
    c1 -= g * e;
    c2 += e;
  }
  c1 *= h;
  c2 *= 2.0 * h;
  return DeltaA{c1, c2, c1 + c2};
}

FunctionalTrace mabuchi(const Background& bg, const PathField& path) {
  require(bg.grid() == path.grid(), "path and background grids differ");
  const int rows = path.n_time() + 1;
  std::vector<double> e_part = per_slice(rows, [&](int j) {
    const PeriodicField u = path.slice(j);
    return 0.5 * bg.S() * energy(bg, u) - energy_alpha(u, bg.r());
  });
  std::vector<double> h_part = per_slice(rows, [&](int j) { return entropy(bg, path.slice(j)); });
  std::vector<double> total(e_part.size());
  for (std::size_t j = 0; j < total.size(); ++j) total[j] = e_part[j] + h_part[j];
  FunctionalTrace tr = make_trace("mabuchi", path_times(path), std::move(total));
  tr.energy_part = std::move(e_part);
  tr.entropy_part = std::move(h_part);
  return tr;
}

FunctionalTrace mabuchi_k(const Background& bg, const PathField& path, const FiberFamily& family, int k) {
  require(k >= 1, "k must be >= 1");
  if (family.grid != path.grid() || family.n_times() != static_cast<std::size_t>(path.n_time() + 1))
    fail(ErrorCode::family_mismatch, "family grid or times do not match the path");
  for (std::size_t t = 0; t < family.n_times(); ++t)
    if (std::abs(family.times[t] - path.time(static_cast<int>(t))) > 1e-14)
      fail(ErrorCode::family_mismatch, "family times do not match the path");
  if (static_cast<std::size_t>(k) > family.n_eps())
    fail(ErrorCode::family_mismatch, "k = " + std::to_string(k) + " exceeds the " +
                                         std::to_string(family.n_eps()) + " epsilons of the family");
  const int rows = path.n_time() + 1;
  const double h = path.grid().spacing();
  std::vector<double> e_part = per_slice(rows, [&](int j) {
    const PeriodicField u = path.slice(j);
    return 0.5 * bg.S() * energy(bg, u) - energy_alpha(u, bg.r());
  });
  std::vector<double> h_part = per_slice(rows, [&](int j) {
    const PeriodicField m = metric_density(bg, path.slice(j));
    check_density(m, "mabuchi_k");
    double acc = 0.0;
    for (int i = 0; i < m.size(); ++i) {
      double avg = 0.0;
      for (int e = 0; e < k; ++e) avg += std::exp(family.phi(e, j)[i]);
      acc += std::log(avg / k) * clamp0(m[i]);
    }
    return h * acc;
  });
  std::vector<double> total(e_part.size());
  for (std::size_t j = 0; j < total.size(); ++j) total[j] = e_part[j] + h_part[j];
  FunctionalTrace tr = make_trace("mabuchi_k", path_times(path), std::move(total));
  tr.energy_part = std::move(e_part);
  tr.entropy_part = std::move(h_part);
  tr.meta["k"] = k;
  tr.meta["epsilons"] = std::vector<double>(family.epsilons.begin(), family.epsilons.begin() + k);
  return tr;
}

FunctionalTrace mabuchi_eps_A(const Background& bg, const EpsGeodesic& eg, const TruncationSpec& spec) {
  validate(spec);
  const PathField& path = eg.path;
  require(bg.grid() == path.grid(), "path and background grids differ");
  const int rows = path.n_time() + 1;
  std::vector<double> e_part = per_slice(rows, [&](int j) {
    const PeriodicField u = path.slice(j);
    return 0.5 * bg.S() * energy(bg, u) - energy_alpha(u, bg.r());
  });
  std::vector<double> h_part = per_slice(rows, [&](int j) {
    const PeriodicField m = metric_density(bg, path.slice(j));
    check_density(m, "mabuchi_eps_A");
    const double h = m.grid().spacing();
    double acc = 0.0;
    for (int i = 0; i < m.size(); ++i) {
      const double mi = clamp0(m[i]);
      if (mi == 0.0) continue;
      acc += std::max(std::log(mi / bg.w()[i]), spec.chi[i] - spec.A) * mi;
    }
    return h * acc;
  });
  std::vector<double> total(e_part.size());
  for (std::size_t j = 0; j < total.size(); ++j) total[j] = e_part[j] + h_part[j];
  FunctionalTrace tr = make_trace("mabuchi_eps_A", path_times(path), std::move(total));
  tr.energy_part = std::move(e_part);
  tr.entropy_part = std::move(h_part);
  tr.meta["epsilon"] = eg.epsilon;
  tr.meta["A"] = spec.A;
  tr.meta["energy_argument"] = "eps_geodesic_potential";
  return tr;
}

std::vector<double> default_time_bump(int n_time) {
  require(n_time >= 4, "bump needs n_time >= 4");
  std::vector<double> tau(static_cast<std::size_t>(n_time + 1), 0.0);
  const double a = 1.0 / n_time, b = 1.0 - 1.0 / n_time;
  for (int j = 2; j <= n_time - 2; ++j) {
    const double s = static_cast<double>(j) / n_time;
    const double v = std::sin(std::numbers::pi * (s - a) / (b - a));
    tau[j] = v * v * v * v;
  }
  return tau;
}

DdcEnergyReport ddc_energy_check(const Background& bg, const PathField& path, const std::vector<double>& tau) {
  const int nt = path.n_time();
  require(static_cast<int>(tau.size()) == nt + 1, "tau needs n_time + 1 samples");
  require(nt >= 4, "ddc check needs n_time >= 4");
  require(tau[0] == 0.0 && tau[1] == 0.0 && tau[nt - 1] == 0.0 && tau[nt] == 0.0,
          "tau must vanish on the first and last two time rows");
  const double ds = path.time_step();
  const ReducedHessian H = reduced_hessian(bg, path);
  const double h = path.grid().spacing();
  DdcEnergyReport rep;
  for (int j = 1; j < nt; ++j) {
    const double Ej = energy(bg, path.slice(j));
    rep.lhs += Ej * (tau[j + 1] - 2.0 * tau[j] + tau[j - 1]) / (ds * ds) * ds;
    double det = 0.0;
    for (int i = 0; i < path.n_points(); ++i) det += H.det(j, i);
    rep.rhs += 2.0 * h * det * tau[j] * ds;
  }
  const double scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-300});
  rep.relative_discrepancy = std::abs(rep.lhs - rep.rhs) / scale;
  return rep;
}

}  // namespace geolab
