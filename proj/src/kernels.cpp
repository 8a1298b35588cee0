#include "geolab/kernels.hpp"

#include <cassert>

#ifdef GEOLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace geolab::kernels {
namespace {

inline void second_difference_row(const double* u, double* out, int n, double inv_h2) {
  out[0] = (u[1] - 2.0 * u[0] + u[n - 1]) * inv_h2;
  for (int i = 1; i < n - 1; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
  out[n - 1] = (u[0] - 2.0 * u[n - 1] + u[n - 2]) * inv_h2;
}

inline void first_difference_row(const double* u, double* out, int n, double inv_2h) {
  out[0] = (u[1] - u[n - 1]) * inv_2h;
  for (int i = 1; i < n - 1; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv_2h;
  out[n - 1] = (u[0] - u[n - 2]) * inv_2h;
}

inline void convolve_row(const double* u, double* out, int n, const Stencil& st) {
  const std::size_t taps = st.offsets.size();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t p = 0; p < taps; ++p) {
      int k = i + st.offsets[p];
      if (k >= n) k -= n;
      acc += st.weights[p] * u[k];
    }
    out[i] = acc;
  }
}

inline double row_dot_one(const double* a, const double* b, int n, double h) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return h * acc;
}

// Interior row j (1 <= j <= n_time-1) of the reduced Hessian; writes slot j-1.
inline void hessian_row(const double* path, const double* w, int n, int j, double h,
                        double ds, HessianRows out) {
  const double inv_h2 = 1.0 / (h * h);
  const double inv_ds2 = 1.0 / (ds * ds);
  const double inv_4hds = 1.0 / (4.0 * h * ds);
  const double* up = path + static_cast<std::size_t>(j + 1) * n;
  const double* mid = path + static_cast<std::size_t>(j) * n;
  const double* dn = path + static_cast<std::size_t>(j - 1) * n;
  const std::size_t base = static_cast<std::size_t>(j - 1) * n;
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1 == n) ? 0 : i + 1;
    const int im = (i == 0) ? n - 1 : i - 1;
    out.m_xx[base + i] = w[i] + (mid[ip] - 2.0 * mid[i] + mid[im]) * inv_h2;
    out.m_ss[base + i] = (up[i] - 2.0 * mid[i] + dn[i]) * inv_ds2;
    out.m_xs[base + i] = ((up[ip] - up[im]) - (dn[ip] - dn[im])) * inv_4hds;
  }
}

inline void residual_row(const double* path, const double* w, double eps, int n, int j,
                         double h, double ds, double* out) {
  const double inv_h2 = 1.0 / (h * h);
  const double inv_ds2 = 1.0 / (ds * ds);
  const double inv_4hds = 1.0 / (4.0 * h * ds);
  const double* up = path + static_cast<std::size_t>(j + 1) * n;
  const double* mid = path + static_cast<std::size_t>(j) * n;
  const double* dn = path + static_cast<std::size_t>(j - 1) * n;
  double* o = out + static_cast<std::size_t>(j - 1) * n;
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1 == n) ? 0 : i + 1;
    const int im = (i == 0) ? n - 1 : i - 1;
    const double mxx = w[i] + (mid[ip] - 2.0 * mid[i] + mid[im]) * inv_h2;
    const double mss = (up[i] - 2.0 * mid[i] + dn[i]) * inv_ds2;
    const double mxs = ((up[ip] - up[im]) - (dn[ip] - dn[im])) * inv_4hds;
    o[i] = mxx * mss - mxs * mxs - eps * w[i];
  }
}

inline int rows_of(std::span<const double> in, int n) {
  assert(n > 0 && in.size() % static_cast<std::size_t>(n) == 0);
  return static_cast<int>(in.size() / static_cast<std::size_t>(n));
}

}  // namespace

namespace serial {

void second_difference_rows(std::span<const double> in, std::span<double> out, int n,
                            double inv_h2) {
  const int rows = rows_of(in, n);
  for (int r = 0; r < rows; ++r)
    second_difference_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n,
                          inv_h2);
}

void first_difference_rows(std::span<const double> in, std::span<double> out, int n,
                           double inv_2h) {
  const int rows = rows_of(in, n);
  for (int r = 0; r < rows; ++r)
    first_difference_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n,
                         inv_2h);
}

void convolve_rows(std::span<const double> in, std::span<double> out, int n,
                   const Stencil& stencil) {
  const int rows = rows_of(in, n);
  for (int r = 0; r < rows; ++r)
    convolve_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n, stencil);
}

void row_dot(std::span<const double> a, std::span<const double> b, std::span<double> out,
             int n, double h) {
  const int rows = rows_of(a, n);
  for (int r = 0; r < rows; ++r)
    out[r] = row_dot_one(a.data() + std::size_t(r) * n, b.data() + std::size_t(r) * n, n, h);
}

void reduced_hessian(std::span<const double> path, std::span<const double> w, int n,
                     int n_time, double h, double ds, HessianRows out) {
  for (int j = 1; j < n_time; ++j) hessian_row(path.data(), w.data(), n, j, h, ds, out);
}

void ma_residual(std::span<const double> path, std::span<const double> w, double eps, int n,
                 int n_time, double h, double ds, std::span<double> out) {
  for (int j = 1; j < n_time; ++j) residual_row(path.data(), w.data(), eps, n, j, h, ds, out.data());
}

}  // namespace serial

namespace parallel {

void second_difference_rows(std::span<const double> in, std::span<double> out, int n,
                            double inv_h2) {
  const int rows = rows_of(in, n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    second_difference_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n,
                          inv_h2);
}

void first_difference_rows(std::span<const double> in, std::span<double> out, int n,
                           double inv_2h) {
  const int rows = rows_of(in, n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    first_difference_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n,
                         inv_2h);
}

void convolve_rows(std::span<const double> in, std::span<double> out, int n,
                   const Stencil& stencil) {
  const int rows = rows_of(in, n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    convolve_row(in.data() + std::size_t(r) * n, out.data() + std::size_t(r) * n, n, stencil);
}

void row_dot(std::span<const double> a, std::span<const double> b, std::span<double> out,
             int n, double h) {
  const int rows = rows_of(a, n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    out[r] = row_dot_one(a.data() + std::size_t(r) * n, b.data() + std::size_t(r) * n, n, h);
}

void reduced_hessian(std::span<const double> path, std::span<const double> w, int n,
                     int n_time, double h, double ds, HessianRows out) {
#pragma omp parallel for schedule(static)
  for (int j = 1; j < n_time; ++j) hessian_row(path.data(), w.data(), n, j, h, ds, out);
}

void ma_residual(std::span<const double> path, std::span<const double> w, double eps, int n,
                 int n_time, double h, double ds, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (int j = 1; j < n_time; ++j) residual_row(path.data(), w.data(), eps, n, j, h, ds, out.data());
}

}  // namespace parallel

int max_threads() {
#ifdef GEOLAB_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef GEOLAB_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace geolab::kernels
