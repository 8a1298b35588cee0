#include "geolab/newton.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>

#include "geolab/errors.hpp"

namespace geolab {

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

NewtonResult damped_newton(const NewtonSystem& system, std::vector<double> x0,
                           const NewtonOptions& options) {
  NewtonResult out;
  out.x = std::move(x0);
  const std::size_t n = out.x.size();
  std::vector<double> f(n), f_trial(n), trial(n);
  system.residual(out.x, f);
  double r = sup_norm(f);
  out.history.push_back(r);

  while (!(r <= options.tolerance)) {
    if (!std::isfinite(r)) fail(ErrorCode::no_convergence, "residual is not finite");
    if (out.iterations >= options.max_iterations)
      fail(ErrorCode::no_convergence, "no convergence after " + std::to_string(out.iterations) +
                                          " iterations, residual " + std::to_string(r));
    const SparseMatrix J = system.jacobian(out.x);
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) fail(ErrorCode::singular_system, "Jacobian factorization failed");
    Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd step = lu.solve(-fv);
    if (lu.info() != Eigen::Success) fail(ErrorCode::singular_system, "Jacobian solve failed");

    double lambda = 1.0;
    bool accepted = false, cone_ok_seen = false;
    for (int k = 0; k <= options.max_halvings; ++k) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = out.x[i] + lambda * step[static_cast<Eigen::Index>(i)];
      const bool cone = !system.admissible || system.admissible(trial);
      if (cone) {
        cone_ok_seen = true;
        system.residual(trial, f_trial);
        const double rt = sup_norm(f_trial);
        if (rt < r) {
          out.x.swap(trial);
          f.swap(f_trial);
          r = rt;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (!cone_ok_seen)
        fail(ErrorCode::positivity_loss,
             "no damped step keeps the cone condition (residual " + std::to_string(r) + ")");
      fail(ErrorCode::no_convergence,
           "damping could not decrease the residual " + std::to_string(r));
    }
    ++out.iterations;
    out.history.push_back(r);
  }
  out.residual = r;
  return out;
}

}  // namespace geolab
