#pragma once

// Discretized model geometry: invariant potentials on a flat complex torus,
// reduced to one periodic real variable x in [0, 1). Complex Hessians become
// real second derivatives, so the fiber metric of a potential u is the
// density m[u] = w + D^2 u against dx.

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace geolab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Scheme { central2, spectral };

class SpatialGrid {
 public:
  // n_points >= 8 and even.
  explicit SpatialGrid(int n_points);

  int size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double node(int j) const noexcept { return static_cast<double>(j) / n_; }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  int n_;
  double h_;
};

class PeriodicField {
 public:
  PeriodicField(SpatialGrid grid, std::vector<double> values);

  static PeriodicField constant(SpatialGrid grid, double c);
  static PeriodicField sample(SpatialGrid grid, const std::function<double(double)>& f);

  const SpatialGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](int j) const { return values_[static_cast<std::size_t>(j)]; }

  double min() const;
  double max() const;
  double sup_norm() const;

 private:
  SpatialGrid grid_;
  std::vector<double> values_;
};

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator-(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator*(double s, const PeriodicField& a);
PeriodicField operator*(const PeriodicField& a, const PeriodicField& b);  // nodewise
PeriodicField map(const PeriodicField& a, const std::function<double(double)>& f);
double sup_distance(const PeriodicField& a, const PeriodicField& b);

// Periodic second derivative. central2 is the 3-point stencil; spectral applies
// the Fourier multiplier -(2 pi k)^2 (Nyquist mode included).
PeriodicField second_derivative(const PeriodicField& u, Scheme scheme = Scheme::central2);

// Centered periodic first difference (u_{j+1} - u_{j-1}) / 2h.
PeriodicField first_derivative(const PeriodicField& u);

// Exact periodic rectangle rule h * sum u_j.
double integrate(const PeriodicField& u);
double integrate(std::span<const double> u, double h);

// Symbol of central2 at wavenumber k: D^2 cos(2 pi k x) = sigma * cos(2 pi k x).
double central2_symbol(int k, double h);

class Background {
 public:
  const SpatialGrid& grid() const noexcept { return w_.grid(); }
  const PeriodicField& w() const noexcept { return w_; }
  const PeriodicField& r() const noexcept { return r_; }
  const PeriodicField& psi() const noexcept { return psi_; }
  double S() const noexcept { return S_; }
  Scheme scheme() const noexcept { return scheme_; }

 private:
  friend Background make_background(const PeriodicField& psi, Scheme scheme);
  Background(PeriodicField w, PeriodicField r, PeriodicField psi, double S, Scheme scheme);

  PeriodicField w_;
  PeriodicField r_;
  PeriodicField psi_;
  double S_;
  Scheme scheme_;
};

// w = 1 + D^2 psi normalized to unit mass, r = -D^2 log w, S = int r / int w.
// Throws NonAdmissiblePsi if 1 + D^2 psi <= 0 anywhere.
Background make_background(const PeriodicField& psi, Scheme scheme = Scheme::central2);
Background flat_background(const SpatialGrid& grid, Scheme scheme = Scheme::central2);

PeriodicField metric_density(const Background& bg, const PeriodicField& u);
bool is_admissible(const Background& bg, const PeriodicField& u);

// Potential Phi on X x [0,1], rows s_j = j / n_time.
class PathField {
 public:
  PathField(SpatialGrid grid, int n_time, std::vector<double> values);
  static PathField from_slices(const std::vector<PeriodicField>& slices);
  // (1 - s) phi0 + s phi1 on rows s_j = j / n_time.
  static PathField linear(const PeriodicField& phi0, const PeriodicField& phi1, int n_time);

  const SpatialGrid& grid() const noexcept { return grid_; }
  int n_points() const noexcept { return grid_.size(); }
  int n_time() const noexcept { return n_time_; }
  double time_step() const noexcept { return 1.0 / n_time_; }
  double time(int j) const noexcept { return static_cast<double>(j) / n_time_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(int j) const;
  PeriodicField slice(int j) const;
  PeriodicField endpoint_0() const { return slice(0); }
  PeriodicField endpoint_1() const { return slice(n_time_); }
  double operator()(int j, int i) const {
    return values_[static_cast<std::size_t>(j) * grid_.size() + i];
  }

 private:
  SpatialGrid grid_;
  int n_time_;
  std::vector<double> values_;
};

double sup_distance(const PathField& a, const PathField& b);

// Coefficients (w + Phi_xx, Phi_xs, Phi_ss) on interior rows j = 1..n_time-1.
class ReducedHessian {
 public:
  ReducedHessian(SpatialGrid grid, int n_time, std::vector<double> m_xx,
                 std::vector<double> m_xs, std::vector<double> m_ss);

  const SpatialGrid& grid() const noexcept { return grid_; }
  int n_time() const noexcept { return n_time_; }
  // j in [1, n_time - 1]
  double xx(int j, int i) const { return m_xx_[index(j, i)]; }
  double xs(int j, int i) const { return m_xs_[index(j, i)]; }
  double ss(int j, int i) const { return m_ss_[index(j, i)]; }
  double det(int j, int i) const { return xx(j, i) * ss(j, i) - xs(j, i) * xs(j, i); }
  PeriodicField slice_xx(int j) const;
  PeriodicField slice_xs(int j) const;
  PeriodicField slice_ss(int j) const;

 private:
  std::size_t index(int j, int i) const {
    return static_cast<std::size_t>(j - 1) * grid_.size() + static_cast<std::size_t>(i);
  }
  SpatialGrid grid_;
  int n_time_;
  std::vector<double> m_xx_, m_xs_, m_ss_;
};

// Central differences in x and s (central2 in x regardless of bg.scheme()).
ReducedHessian reduced_hessian(const Background& bg, const PathField& path);

// f(x) = sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x); k = 0 is the constant term.
struct FourierTerm {
  int k;
  double a;
  double b;
};
PeriodicField fourier_field(const SpatialGrid& grid, std::span<const FourierTerm> terms);

// Canonical nonflat endpoint amplitude: 0.05 cos(2 pi x) under dd^c = D^2 / (2 pi).
inline constexpr double kCanonicalAmplitude = 0.05 / kTwoPi;

}  // namespace geolab
