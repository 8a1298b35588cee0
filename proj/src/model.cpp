#include "geolab/model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include "geolab/errors.hpp"
#include "geolab/kernels.hpp"
#include "fftw_lock.hpp"

namespace geolab {

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

SpatialGrid::SpatialGrid(int n_points) : n_(n_points), h_(0.0) {
  require(n_points >= 8 && n_points % 2 == 0,
          "grid needs an even number of points >= 8, got " + std::to_string(n_points));
  h_ = 1.0 / n_points;
  require(h_ * n_points == 1.0, "spacing * n_points must equal 1 exactly");
}

PeriodicField::PeriodicField(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == static_cast<std::size_t>(grid_.size()),
          "field length " + std::to_string(values_.size()) + " does not match grid " +
              std::to_string(grid_.size()));
  for (double v : values_) require(std::isfinite(v), "field entries must be finite");
}

PeriodicField PeriodicField::constant(SpatialGrid grid, double c) {
  return PeriodicField(grid, std::vector<double>(static_cast<std::size_t>(grid.size()), c));
}

PeriodicField PeriodicField::sample(SpatialGrid grid, const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) v[j] = f(grid.node(j));
  return PeriodicField(grid, std::move(v));
}

double PeriodicField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PeriodicField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double PeriodicField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <class Op>
PeriodicField zip(const PeriodicField& a, const PeriodicField& b, Op op) {
  require(a.grid() == b.grid(), "fields live on different grids");
  std::vector<double> v(static_cast<std::size_t>(a.size()));
  for (int j = 0; j < a.size(); ++j) v[j] = op(a[j], b[j]);
  return PeriodicField(a.grid(), std::move(v));
}

std::vector<double> spectral_second_derivative(std::span<const double> u) {
  const int n = static_cast<int>(u.size());
  const int nc = n / 2 + 1;
  std::vector<double> in(u.begin(), u.end());
  std::vector<double> out(static_cast<std::size_t>(n));
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, in.data(), spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(n, spec, out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  for (int k = 0; k < nc; ++k) {
    const double mult = -(kTwoPi * k) * (kTwoPi * k) / n;
    spec[k][0] *= mult;
    spec[k][1] *= mult;
  }
  fftw_execute(bwd);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(spec);
  return out;
}

}  // namespace

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
PeriodicField operator*(const PeriodicField& a, const PeriodicField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
PeriodicField operator*(double s, const PeriodicField& a) {
  return map(a, [s](double x) { return s * x; });
}
PeriodicField map(const PeriodicField& a, const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(a.size()));
  for (int j = 0; j < a.size(); ++j) v[j] = f(a[j]);
  return PeriodicField(a.grid(), std::move(v));
}
double sup_distance(const PeriodicField& a, const PeriodicField& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
  double m = 0.0;
  for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

PeriodicField second_derivative(const PeriodicField& u, Scheme scheme) {
  const double h = u.grid().spacing();
  if (scheme == Scheme::spectral) return PeriodicField(u.grid(), spectral_second_derivative(u.values()));
  std::vector<double> out(static_cast<std::size_t>(u.size()));
  kernels::serial::second_difference_rows(u.values(), out, u.size(), 1.0 / (h * h));
  return PeriodicField(u.grid(), std::move(out));
}

PeriodicField first_derivative(const PeriodicField& u) {
  std::vector<double> out(static_cast<std::size_t>(u.size()));
  kernels::serial::first_difference_rows(u.values(), out, u.size(),
                                         1.0 / (2.0 * u.grid().spacing()));
  return PeriodicField(u.grid(), std::move(out));
}

double integrate(std::span<const double> u, double h) {
  double acc = 0.0;
  for (double v : u) acc += v;
  return h * acc;
}

double integrate(const PeriodicField& u) { return integrate(u.values(), u.grid().spacing()); }

double central2_symbol(int k, double h) {
  return -(2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * k * h));
}

Background::Background(PeriodicField w, PeriodicField r, PeriodicField psi, double S, Scheme scheme)
    : w_(std::move(w)), r_(std::move(r)), psi_(std::move(psi)), S_(S), scheme_(scheme) {}

Background make_background(const PeriodicField& psi, Scheme scheme) {
  const PeriodicField d2 = second_derivative(psi, scheme);
  PeriodicField raw = map(d2, [](double v) { return 1.0 + v; });
  if (raw.min() <= 0.0)
    fail(ErrorCode::non_admissible_psi,
         "1 + D^2 psi has minimum " + std::to_string(raw.min()));
  const double mass = integrate(raw);
  PeriodicField w = (1.0 / mass) * raw;
  PeriodicField logw = map(w, [](double v) { return std::log(v); });
  PeriodicField r = -1.0 * second_derivative(logw, scheme);
  const double S = integrate(r) / integrate(w);
  return Background(std::move(w), std::move(r), psi, S, scheme);
}

Background flat_background(const SpatialGrid& grid, Scheme scheme) {
  return make_background(PeriodicField::constant(grid, 0.0), scheme);
}

PeriodicField metric_density(const Background& bg, const PeriodicField& u) {
  return bg.w() + second_derivative(u, bg.scheme());
}

bool is_admissible(const Background& bg, const PeriodicField& u) {
  return metric_density(bg, u).min() > 0.0;
}

PathField::PathField(SpatialGrid grid, int n_time, std::vector<double> values)
    : grid_(grid), n_time_(n_time), values_(std::move(values)) {
  require(n_time >= 1, "n_time must be positive");
  require(values_.size() == static_cast<std::size_t>(n_time + 1) * grid_.size(),
          "path values must have (n_time+1) * n_points entries");
  for (double v : values_) require(std::isfinite(v), "path entries must be finite");
}

PathField PathField::from_slices(const std::vector<PeriodicField>& slices) {
  require(slices.size() >= 2, "a path needs at least two slices");
  const SpatialGrid grid = slices.front().grid();
  std::vector<double> v;
  v.reserve(slices.size() * grid.size());
  for (const auto& s : slices) {
    require(s.grid() == grid, "slices live on different grids");
    v.insert(v.end(), s.values().begin(), s.values().end());
  }
  return PathField(grid, static_cast<int>(slices.size()) - 1, std::move(v));
}

PathField PathField::linear(const PeriodicField& phi0, const PeriodicField& phi1, int n_time) {
  require(phi0.grid() == phi1.grid(), "endpoints live on different grids");
  const int n = phi0.size();
  std::vector<double> v(static_cast<std::size_t>(n_time + 1) * n);
  for (int j = 0; j <= n_time; ++j) {
    const double s = static_cast<double>(j) / n_time;
    for (int i = 0; i < n; ++i) v[std::size_t(j) * n + i] = (1.0 - s) * phi0[i] + s * phi1[i];
  }
  // Rows 0 and n_time are the endpoints bit for bit.
  std::copy(phi0.values().begin(), phi0.values().end(), v.begin());
  std::copy(phi1.values().begin(), phi1.values().end(), v.begin() + std::size_t(n_time) * n);
  return PathField(phi0.grid(), n_time, std::move(v));
}

std::span<const double> PathField::row(int j) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(j) * grid_.size(),
                                                  static_cast<std::size_t>(grid_.size()));
}

PeriodicField PathField::slice(int j) const {
  require(j >= 0 && j <= n_time_, "slice index out of range");
  auto r = row(j);
  return PeriodicField(grid_, std::vector<double>(r.begin(), r.end()));
}

double sup_distance(const PathField& a, const PathField& b) {
  require(a.grid() == b.grid() && a.n_time() == b.n_time(), "paths live on different grids");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k)
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

ReducedHessian::ReducedHessian(SpatialGrid grid, int n_time, std::vector<double> m_xx,
                               std::vector<double> m_xs, std::vector<double> m_ss)
    : grid_(grid), n_time_(n_time), m_xx_(std::move(m_xx)), m_xs_(std::move(m_xs)),
      m_ss_(std::move(m_ss)) {}

namespace {
PeriodicField interior_slice(const std::vector<double>& a, const SpatialGrid& g, int j) {
  const auto begin = a.begin() + static_cast<std::ptrdiff_t>(j - 1) * g.size();
  return PeriodicField(g, std::vector<double>(begin, begin + g.size()));
}
}  // namespace

PeriodicField ReducedHessian::slice_xx(int j) const { return interior_slice(m_xx_, grid_, j); }
PeriodicField ReducedHessian::slice_xs(int j) const { return interior_slice(m_xs_, grid_, j); }
PeriodicField ReducedHessian::slice_ss(int j) const { return interior_slice(m_ss_, grid_, j); }

ReducedHessian reduced_hessian(const Background& bg, const PathField& path) {
  require(bg.grid() == path.grid(), "background and path grids differ");
  require(path.n_time() >= 2, "reduced Hessian needs at least one interior row");
  const int n = path.n_points();
  const std::size_t count = static_cast<std::size_t>(path.n_time() - 1) * n;
  std::vector<double> xx(count), xs(count), ss(count);
  kernels::parallel::reduced_hessian(path.values(), bg.w().values(), n, path.n_time(),
                                     path.grid().spacing(), path.time_step(),
                                     kernels::HessianRows{xx, xs, ss});
  return ReducedHessian(path.grid(), path.n_time(), std::move(xx), std::move(xs), std::move(ss));
}

PeriodicField fourier_field(const SpatialGrid& grid, std::span<const FourierTerm> terms) {
  std::vector<double> v(static_cast<std::size_t>(grid.size()), 0.0);
  for (const auto& t : terms) {
    require(t.k >= 0, "Fourier wavenumbers must be nonnegative");
    for (int j = 0; j < grid.size(); ++j) {
      const double x = grid.node(j);
      if (t.k == 0) {
        v[j] += t.a;
      } else {
        v[j] += t.a * std::cos(kTwoPi * t.k * x) + t.b * std::sin(kTwoPi * t.k * x);
      }
    }
  }
  return PeriodicField(grid, std::move(v));
}

}  // namespace geolab
