#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace geolab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct NewtonSystem {
  std::function<void(std::span<const double> x, std::vector<double>& residual)> residual;
  std::function<SparseMatrix(std::span<const double> x)> jacobian;
  // Optional cone condition an accepted iterate must satisfy.
  std::function<bool(std::span<const double> x)> admissible;
};

struct NewtonOptions {
  double tolerance = 1e-10;  // on the sup norm of the residual
  int max_iterations = 50;
  int max_halvings = 30;
};

struct NewtonResult {
  std::vector<double> x;
  std::vector<double> history;  // sup-norm residual of every accepted iterate, starting point first
  int iterations = 0;
  double residual = 0.0;
};

double sup_norm(std::span<const double> v);

// Damped Newton: full step, halved until the residual decreases and the
// iterate is admissible. Throws NoConvergence, PositivityLoss (when every
// halving fails the cone condition) or SingularSystem.
NewtonResult damped_newton(const NewtonSystem& system, std::vector<double> x0,
                           const NewtonOptions& options);

}  // namespace geolab
