#include <doctest.h>

#include <cmath>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/model.hpp"
#include "support.hpp"

using namespace geolab;
using namespace geolab::test;

TEST_SUITE("model") {

TEST_CASE("grid invariants") {
  SpatialGrid g(64);
  CHECK(g.spacing() * g.size() == 1.0);
  CHECK(g.node(16) == 0.25);
  CHECK_THROWS_AS(SpatialGrid(6), Error);
  CHECK_THROWS_AS(SpatialGrid(33), Error);
}

TEST_CASE("field construction rejects bad values") {
  SpatialGrid g(8);
  CHECK_THROWS_AS(PeriodicField(g, std::vector<double>(7, 0.0)), Error);
  std::vector<double> v(8, 0.0);
  v[3] = NAN;
  CHECK_THROWS_AS(PeriodicField(g, v), Error);
}

TEST_CASE("flat background") {
  SpatialGrid g(64);
  Background bg = make_background(zero(g));
  for (int j = 0; j < g.size(); ++j) {
    CHECK(bg.w()[j] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(bg.r()[j]) < 1e-12);
  }
  CHECK(std::abs(bg.S()) < 1e-12);
}

TEST_CASE("curved background matches direct evaluation") {
  SpatialGrid g(128);
  const double h = g.spacing();
  Background bg = make_background(cos_field(g, 0.01));
  const double sigma = (2.0 / (h * h)) * (std::cos(kTwoPi * h) - 1.0);
  // Unnormalized 1 + 0.01 sigma cos already has unit mass.
  for (int j = 0; j < g.size(); ++j)
    CHECK(bg.w()[j] == doctest::Approx(1.0 + 0.01 * sigma * std::cos(kTwoPi * g.node(j))).epsilon(1e-13));
  CHECK(integrate(bg.w()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(bg.S()) <= 1e-12);
  // r = -D^2 log w
  PeriodicField r = -1.0 * second_derivative(map(bg.w(), [](double v) { return std::log(v); }));
  CHECK(sup_distance(r, bg.r()) < 1e-9);
}

TEST_CASE("non-admissible psi") {
  SpatialGrid g(64);
  try {
    make_background(cos_field(g, 10.0));
    FAIL("expected NonAdmissiblePsi");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_admissible_psi);
  }
}

TEST_CASE("metric density") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  PeriodicField m = metric_density(bg, PeriodicField::constant(g, 3.7));
  CHECK(sup_distance(m, bg.w()) == 0.0);

  const double a = 0.002, h = g.spacing();
  const double sigma = -(2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * h));
  CHECK(sigma == doctest::Approx(central2_symbol(1, h)).epsilon(1e-14));
  PeriodicField expect = PeriodicField::sample(g, [&](double x) { return 1.0 + a * sigma * std::cos(kTwoPi * x); });
  CHECK(sup_distance(metric_density(bg, cos_field(g, a)), expect) < 1e-13);
}

TEST_CASE("admissibility") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  CHECK(is_admissible(bg, zero(g)));
  const double sigma = -central2_symbol(1, g.spacing());
  PeriodicField half = cos_field(g, 0.5 / sigma);
  CHECK(metric_density(bg, half).min() == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(is_admissible(bg, half));
  CHECK_FALSE(is_admissible(bg, cos_field(g, 1.0)));
}

TEST_CASE("second derivative schemes") {
  SpatialGrid g(64);
  const double h = g.spacing();
  CHECK(second_derivative(PeriodicField::constant(g, 2.5)).sup_norm() == 0.0);
  CHECK(second_derivative(PeriodicField::constant(g, 2.5), Scheme::spectral).sup_norm() < 1e-10);

  PeriodicField c = cos_field(g, 1.0);
  const double symbol = -(2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * h));
  CHECK(sup_distance(second_derivative(c), symbol * c) < 1e-10);
  CHECK(sup_distance(second_derivative(c, Scheme::spectral), -(kTwoPi * kTwoPi) * c) < 1e-10);
  // Higher mode, spectral is exact.
  PeriodicField c5 = sin_field(g, 1.0, 5);
  CHECK(sup_distance(second_derivative(c5, Scheme::spectral), -(25 * kTwoPi * kTwoPi) * c5) < 1e-8);
}

TEST_CASE("integrate") {
  SpatialGrid g(64);
  CHECK(integrate(PeriodicField::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(integrate(cos_field(g, 1.0))) < 1e-15);
  Background bg = make_background(cos_field(g, 0.003, 2));
  CHECK(integrate(bg.w()) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mass conservation and linearity") {
  SpatialGrid g(128);
  Background bg = make_background(cos_field(g, 0.001, 3));
  PeriodicField u = PeriodicField::sample(g, [](double x) { return std::exp(std::sin(kTwoPi * x)) * 0.01; });
  PeriodicField v = PeriodicField::sample(g, [](double x) { return std::cos(kTwoPi * 2 * x + 0.3); });
  CHECK(integrate(metric_density(bg, u)) == doctest::Approx(1.0).epsilon(1e-12));
  PeriodicField lhs = second_derivative(2.0 * u + (-3.0) * v);
  PeriodicField rhs = 2.0 * second_derivative(u) + (-3.0) * second_derivative(v);
  CHECK(sup_distance(lhs, rhs) < 1e-9);
}

TEST_CASE("central2 converges to spectral at second order") {
  auto f = [](double x) { return std::exp(std::sin(kTwoPi * x)); };
  std::vector<double> logn, loge;
  for (int n : {64, 128, 256, 512}) {
    SpatialGrid g(n);
    PeriodicField u = PeriodicField::sample(g, f);
    double err = sup_distance(second_derivative(u), second_derivative(u, Scheme::spectral));
    logn.push_back(std::log(static_cast<double>(n)));
    loge.push_back(std::log(err));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logn.size(); ++i) mx += logn[i], my += loge[i];
  mx /= logn.size();
  my /= logn.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < logn.size(); ++i) {
    sxy += (logn[i] - mx) * (loge[i] - my);
    sxx += (logn[i] - mx) * (logn[i] - mx);
  }
  CHECK(-sxy / sxx >= 1.9);
}

TEST_CASE("S vanishes on random backgrounds") {
  SpatialGrid g(96);
  for (int k = 1; k <= 5; ++k) {
    std::vector<FourierTerm> terms{{k, 0.3 / (kTwoPi * kTwoPi * k * k), 0.1 / (kTwoPi * kTwoPi * k * k)}, {1, 0.001, -0.002}};
    Background bg = make_background(fourier_field(g, terms));
    CHECK(std::abs(bg.S()) <= 1e-12);
  }
}

TEST_CASE("paths and reduced Hessian") {
  SpatialGrid g(32);
  Background bg = flat_background(g);
  PathField p = PathField::linear(zero(g), PeriodicField::constant(g, 1.0), 8);
  CHECK(p.endpoint_0().sup_norm() == 0.0);
  CHECK(p.endpoint_1().min() == 1.0);
  CHECK(p(4, 3) == doctest::Approx(0.5));
  ReducedHessian H = reduced_hessian(bg, p);
  for (int j = 1; j < 8; ++j)
    for (int i = 0; i < 32; ++i) {
      CHECK(H.xx(j, i) == doctest::Approx(1.0));
      CHECK(std::abs(H.xs(j, i)) < 1e-12);
      CHECK(std::abs(H.ss(j, i)) < 1e-9);
    }
  CHECK_THROWS_AS(p.slice(9), Error);

  // Phi = s^2 cos: Phi_ss = 2cos, Phi_xs = 2s D1 cos.
  std::vector<PeriodicField> rows;
  for (int j = 0; j <= 8; ++j) rows.push_back(cos_field(g, (j / 8.0) * (j / 8.0)));
  ReducedHessian Q = reduced_hessian(bg, PathField::from_slices(rows));
  CHECK(Q.ss(3, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fourier fields") {
  SpatialGrid g(16);
  std::vector<FourierTerm> t{{0, 1.5, 0.0}, {2, 0.0, 1.0}};
  PeriodicField f = fourier_field(g, t);
  CHECK(f[0] == doctest::Approx(1.5));
  CHECK(f[2] == doctest::Approx(2.5));
  std::vector<FourierTerm> bad{{-1, 1.0, 0.0}};
  CHECK_THROWS_AS(fourier_field(g, bad), Error);
}

}
