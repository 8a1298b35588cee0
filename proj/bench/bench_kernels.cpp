// Serial reference kernels against their OpenMP counterparts.
//
//   geolab_bench --benchmark_filter=residual
//
// Second argument of each benchmark is the thread cap for the parallel run.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "geolab/kernels.hpp"

namespace k = geolab::kernels;

namespace {

struct Grid {
  int n, nt;
  std::vector<double> path, w, out;
  std::vector<double> xx, xs, ss;

  Grid(int n_points, int n_time)
      : n(n_points), nt(n_time),
        path(static_cast<std::size_t>((n_time + 1) * n_points)),
        w(static_cast<std::size_t>(n_points), 1.0),
        out(path.size()),
        xx(static_cast<std::size_t>((n_time - 1) * n_points)), xs(xx.size()), ss(xx.size()) {
    for (int j = 0; j <= nt; ++j) {
      const double s = static_cast<double>(j) / nt;
      for (int i = 0; i < n; ++i)
        path[static_cast<std::size_t>(j * n + i)] =
            0.5 * 0.01 * (s * s - s) + s * 0.008 * std::cos(6.283185307179586 * i / n);
    }
  }
  double h() const { return 1.0 / n; }
  double ds() const { return 1.0 / nt; }
};

bool use_parallel(const benchmark::State& st) { return st.range(1) > 0; }

void prepare(benchmark::State& st) {
  if (use_parallel(st)) k::set_threads(static_cast<int>(st.range(1)));
}

void BM_second_difference(benchmark::State& st) {
  Grid g(static_cast<int>(st.range(0)), 64);
  prepare(st);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  for (auto _ : st) {
    if (use_parallel(st))
      k::parallel::second_difference_rows(g.path, g.out, g.n, inv_h2);
    else
      k::serial::second_difference_rows(g.path, g.out, g.n, inv_h2);
    benchmark::DoNotOptimize(g.out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.path.size()));
}

void BM_convolve(benchmark::State& st) {
  Grid g(static_cast<int>(st.range(0)), 64);
  prepare(st);
  k::Stencil stencil;
  for (int p = -12; p <= 12; ++p) {
    stencil.offsets.push_back((p + g.n) % g.n);
    stencil.weights.push_back(std::exp(-0.5 * p * p / 16.0));
  }
  const double total = std::accumulate(stencil.weights.begin(), stencil.weights.end(), 0.0);
  for (double& x : stencil.weights) x /= total;
  for (auto _ : st) {
    if (use_parallel(st))
      k::parallel::convolve_rows(g.path, g.out, g.n, stencil);
    else
      k::serial::convolve_rows(g.path, g.out, g.n, stencil);
    benchmark::DoNotOptimize(g.out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.path.size()));
}

void BM_reduced_hessian(benchmark::State& st) {
  Grid g(static_cast<int>(st.range(0)), 64);
  prepare(st);
  for (auto _ : st) {
    const k::HessianRows rows{g.xx, g.xs, g.ss};
    if (use_parallel(st))
      k::parallel::reduced_hessian(g.path, g.w, g.n, g.nt, g.h(), g.ds(), rows);
    else
      k::serial::reduced_hessian(g.path, g.w, g.n, g.nt, g.h(), g.ds(), rows);
    benchmark::DoNotOptimize(g.xx.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.xx.size()));
}

void BM_residual(benchmark::State& st) {
  Grid g(static_cast<int>(st.range(0)), 64);
  prepare(st);
  std::vector<double> out(g.xx.size());
  for (auto _ : st) {
    if (use_parallel(st))
      k::parallel::ma_residual(g.path, g.w, 0.01, g.n, g.nt, g.h(), g.ds(), out);
    else
      k::serial::ma_residual(g.path, g.w, 0.01, g.n, g.nt, g.h(), g.ds(), out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(out.size()));
}

// range(1) == 0 selects the serial reference; a positive value is the thread cap.
void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {256, 1024, 4096})
    for (int t : {0, 1, 2, 4}) b->Args({n, t});
  b->ArgNames({"N", "threads"});
}

}  // namespace

BENCHMARK(BM_second_difference)->Apply(sizes);
BENCHMARK(BM_convolve)->Apply(sizes);
BENCHMARK(BM_reduced_hessian)->Apply(sizes);
BENCHMARK(BM_residual)->Apply(sizes);

BENCHMARK_MAIN();
