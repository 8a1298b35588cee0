#pragma once

// Data-parallel inner loops on row-major (rows x n_points) periodic grids.
//
// Every kernel exists twice with identical signatures: `serial` is the
// reference loop, `parallel` distributes rows (or row blocks) over OpenMP
// threads. Both call the same per-row body, so their outputs are bitwise
// identical regardless of thread count.

#include <span>
#include <utility>
#include <vector>

namespace geolab::kernels {

// A periodic convolution stencil: out[i] = sum_p weight_p * in[(i + offset_p) mod n],
// summed in the stored order.
struct Stencil {
  std::vector<int> offsets;  // in [0, n)
  std::vector<double> weights;
};

// Coefficients of the reduced space-time Hessian on interior time rows
// j = 1..n_time-1; each output has (n_time-1) * n_points entries.
struct HessianRows {
  std::span<double> m_xx;
  std::span<double> m_xs;
  std::span<double> m_ss;
};

#define GEOLAB_KERNEL_DECLS                                                              \
  void second_difference_rows(std::span<const double> in, std::span<double> out,        \
                              int n_points, double inv_h2);                              \
  void first_difference_rows(std::span<const double> in, std::span<double> out,         \
                             int n_points, double inv_2h);                               \
  void convolve_rows(std::span<const double> in, std::span<double> out, int n_points,   \
                     const Stencil& stencil);                                            \
  void row_dot(std::span<const double> a, std::span<const double> b,                    \
               std::span<double> out, int n_points, double h);                           \
  void reduced_hessian(std::span<const double> path, std::span<const double> w,         \
                       int n_points, int n_time, double h, double ds, HessianRows out);  \
  void ma_residual(std::span<const double> path, std::span<const double> w,             \
                   double epsilon, int n_points, int n_time, double h, double ds,        \
                   std::span<double> out);

namespace serial {
GEOLAB_KERNEL_DECLS
}
namespace parallel {
GEOLAB_KERNEL_DECLS
}

#undef GEOLAB_KERNEL_DECLS

// Threads used by the parallel kernels (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace geolab::kernels
